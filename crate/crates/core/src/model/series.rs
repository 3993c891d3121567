use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpdPoint;
use crate::scalar::Scalar;

/// Provenance of a covariance series.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Samples per second of the underlying signal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_rate: Option<f64>,
    /// Rows of the `p × q` reduction matrix that produced the series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Indices of points that left SPD(p) during a Euclidean simulation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub not_pd_steps: Vec<usize>,
}

/// Ordered sequence of covariance matrices sharing one dimension.
#[derive(Clone, Debug)]
pub struct CovSeries<T: Scalar> {
    points: Vec<SpdPoint<T>>,
    /// Window length in seconds.
    pub dt: f64,
    pub meta: SeriesMeta,
}

impl<T: Scalar> CovSeries<T> {
    pub fn new(points: Vec<SpdPoint<T>>, dt: f64) -> Result<Self> {
        Self::with_meta(points, dt, SeriesMeta::default())
    }

    pub fn with_meta(points: Vec<SpdPoint<T>>, dt: f64, meta: SeriesMeta) -> Result<Self> {
        let first = points.first().ok_or(Error::InsufficientData {
            needed: 1,
            available: 0,
        })?;
        let p = first.dim();
        for x in &points {
            x.matrix().check_dim(p)?;
        }
        Ok(Self { points, dt, meta })
    }

    pub fn points(&self) -> &[SpdPoint<T>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<SpdPoint<T>> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}
