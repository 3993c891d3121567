use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{frame_dim, Geometry, SpdPoint, Tangent};
use crate::scalar::Scalar;

/// Step vectors `V_i = Log_{S_i}(S_{i+1})`, based at `S_i`, for `i = 0..n−2`.
pub fn extract_directions<T: Scalar>(
    g: Geometry,
    points: &[SpdPoint<T>],
) -> Result<Vec<Tangent<T>>> {
    if points.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            available: points.len(),
        });
    }
    points.windows(2).map(|w| g.log_map(&w[0], &w[1])).collect()
}

/// One regression row, all vectors in frame coordinates at `S_k`.
#[derive(Clone, Debug)]
pub struct DatasetRow<T: Scalar> {
    /// Zero-based position `k` of the base point in the series.
    pub index: usize,
    /// `v_k`, the response.
    pub response: DVector<T>,
    /// `v_{kℓ}` for `ℓ = 1..L`: step `V_{k−ℓ}` transported to `S_k`.
    pub lagged: Vec<DVector<T>>,
    /// `v*_k`, coordinates of `Log_{S_k}(S*)`.
    pub attractor: DVector<T>,
}

/// Regression data for a fixed lag `L` and attractor `S*`.
#[derive(Clone, Debug)]
pub struct TangentDataset<T: Scalar> {
    pub geometry: Geometry,
    pub lag: usize,
    /// Tangent-space dimension `m`.
    pub dim: usize,
    /// Rows for `k = L..n−2`; there are exactly `n − 1 − L` of them.
    pub rows: Vec<DatasetRow<T>>,
    /// Coordinates of every step `V_i` in the frame at its own base point.
    /// The parallel frame is transported from the identity, so these also
    /// equal the coordinates of `V_i` carried to any other base via the identity.
    pub step_coords: Vec<DVector<T>>,
    /// The attractor the rows were built against.
    pub attractor_point: SpdPoint<T>,
}

impl<T: Scalar> TangentDataset<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Builds the regression rows of the manifold VAR model.
pub fn build_dataset<T: Scalar>(
    g: Geometry,
    points: &[SpdPoint<T>],
    lag: usize,
    attractor: &SpdPoint<T>,
) -> Result<TangentDataset<T>> {
    let n = points.len();
    if n < lag + 2 {
        return Err(Error::InsufficientData {
            needed: lag + 2,
            available: n,
        });
    }
    attractor.matrix().check_dim(points[0].dim())?;
    let dirs = extract_directions(g, points)?;
    let step_coords = dirs
        .iter()
        .zip(points)
        .map(|(v, s)| g.to_coords(s, v))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(n - 1 - lag);
    for k in lag..(n - 1) {
        let base = &points[k];
        let lagged = (1..=lag)
            .map(|l| g.transported_coords(&points[k - l], base, &dirs[k - l]))
            .collect::<Result<Vec<_>>>()?;
        let attractor = g.to_coords(base, &g.log_map(base, attractor)?)?;
        rows.push(DatasetRow {
            index: k,
            response: step_coords[k].clone(),
            lagged,
            attractor,
        });
    }
    Ok(TangentDataset {
        geometry: g,
        lag,
        dim: frame_dim(points[0].dim()),
        rows,
        step_coords,
        attractor_point: attractor.clone(),
    })
}
