use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{frame_dim, Geometry, SpdPoint};
use crate::scalar::Scalar;
use crate::stats::NoiseFactor;

/// Scalar-coefficient model: `A_ℓ = α_ℓ I`, `B = β I`, `Σ = σ² I`.
#[derive(Clone, Debug)]
pub struct ScalarParams<T: Scalar> {
    pub alpha: Vec<T>,
    pub beta: T,
    pub sigma: T,
    pub attractor: SpdPoint<T>,
    pub geometry: Geometry,
}

/// Diagonal model: `A_ℓ = diag(a_ℓ·)`, `B = diag(b)`, `Σ = diag(σ²)` in the
/// parallel frame.
#[derive(Clone, Debug)]
pub struct DiagParams<T: Scalar> {
    /// `L × m`; row `ℓ − 1` holds the diagonal of `A_ℓ`.
    pub a: DMatrix<T>,
    pub b: DVector<T>,
    pub sigma: DVector<T>,
    pub attractor: SpdPoint<T>,
    pub geometry: Geometry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Scalar,
    Diagonal,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scalar" => Ok(ModelKind::Scalar),
            "diagonal" | "diag" => Ok(ModelKind::Diagonal),
            other => Err(Error::Format(format!("unknown model '{other}'"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Scalar => "scalar",
            ModelKind::Diagonal => "diagonal",
        })
    }
}

#[derive(Clone, Debug)]
pub enum ModelParams<T: Scalar> {
    Scalar(ScalarParams<T>),
    Diagonal(DiagParams<T>),
}

impl<T: Scalar> From<ScalarParams<T>> for ModelParams<T> {
    fn from(p: ScalarParams<T>) -> Self {
        ModelParams::Scalar(p)
    }
}

impl<T: Scalar> From<DiagParams<T>> for ModelParams<T> {
    fn from(p: DiagParams<T>) -> Self {
        ModelParams::Diagonal(p)
    }
}

impl<T: Scalar> ModelParams<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Scalar(_) => ModelKind::Scalar,
            ModelParams::Diagonal(_) => ModelKind::Diagonal,
        }
    }

    pub fn lag(&self) -> usize {
        match self {
            ModelParams::Scalar(p) => p.alpha.len(),
            ModelParams::Diagonal(p) => p.a.nrows(),
        }
    }

    pub fn geometry(&self) -> Geometry {
        match self {
            ModelParams::Scalar(p) => p.geometry,
            ModelParams::Diagonal(p) => p.geometry,
        }
    }

    pub fn attractor(&self) -> &SpdPoint<T> {
        match self {
            ModelParams::Scalar(p) => &p.attractor,
            ModelParams::Diagonal(p) => &p.attractor,
        }
    }

    /// Tangent-space dimension `m`.
    pub fn frame_dim(&self) -> usize {
        frame_dim(self.attractor().dim())
    }

    /// Checks shapes and that every noise scale is finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        let m = self.frame_dim();
        let bad_sigma = |s: T| !s.is_finite() || s < T::zero();
        match self {
            ModelParams::Scalar(p) => {
                if bad_sigma(p.sigma) {
                    return Err(Error::Format(format!(
                        "sigma must be finite and non-negative, got {}",
                        p.sigma
                    )));
                }
            }
            ModelParams::Diagonal(p) => {
                if p.a.ncols() != m && p.a.nrows() > 0 {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: p.a.ncols(),
                    });
                }
                if p.b.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: p.b.len(),
                    });
                }
                if p.sigma.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: p.sigma.len(),
                    });
                }
                if p.sigma.iter().any(|&s| bad_sigma(s)) {
                    return Err(Error::Format(
                        "sigma entries must be finite and non-negative".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Conditional mean `Σ_ℓ A_ℓ v_{kℓ} + B v*_k` in frame coordinates.
    pub fn drift(&self, lagged: &[DVector<T>], attractor: &DVector<T>) -> DVector<T> {
        match self {
            ModelParams::Scalar(p) => {
                let mut out = attractor * p.beta;
                for (a, v) in p.alpha.iter().zip(lagged) {
                    out.axpy(*a, v, T::one());
                }
                out
            }
            ModelParams::Diagonal(p) => {
                let mut out = attractor.component_mul(&p.b);
                for (l, v) in lagged.iter().enumerate() {
                    out += v.component_mul(&p.a.row(l).transpose());
                }
                out
            }
        }
    }

    pub fn noise(&self) -> NoiseFactor<T> {
        match self {
            ModelParams::Scalar(p) => NoiseFactor::isotropic(self.frame_dim(), p.sigma),
            ModelParams::Diagonal(p) => NoiseFactor::diagonal(&p.sigma),
        }
    }
}
