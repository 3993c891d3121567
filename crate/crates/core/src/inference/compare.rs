use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::inference::fit::FitResult;
use crate::model::ModelKind;
use crate::scalar::Scalar;
use crate::stats::{classical_mds, MdsResult};

/// Symmetrised Mahalanobis distances between fitted series and their
/// two-dimensional MDS embedding.
#[derive(Clone, Debug)]
pub struct SeizureComparison<T: Scalar> {
    pub distances: DMatrix<T>,
    pub mds: MdsResult<T>,
}

/// `d_ij = ½(√(ΔᵀW_iΔ) + √(ΔᵀW_jΔ))` with `Δ = Φ_i − Φ_j` and `W_i` the Fisher
/// information of fit `i`.
pub fn mahalanobis_compare<T: Scalar>(fits: &[FitResult<T>]) -> Result<SeizureComparison<T>> {
    if fits.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            available: fits.len(),
        });
    }
    let describe = |f: &FitResult<T>| format!("L={} {}", f.lag(), f.restricted);
    let first = &fits[0];
    for f in fits {
        if f.kind() != ModelKind::Scalar {
            return Err(Error::Format(
                "Mahalanobis comparison needs scalar fits".into(),
            ));
        }
        if f.lag() != first.lag() || f.restricted != first.restricted {
            return Err(Error::MixedLag {
                expected: describe(first),
                found: describe(f),
            });
        }
    }
    let phi: Vec<_> = fits.iter().map(FitResult::estimates).collect();
    let n = fits.len();
    let mut distances = DMatrix::zeros(n, n);
    let half = T::lit(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let delta = &phi[i] - &phi[j];
            let qi = delta.dot(&(&fits[i].fisher * &delta)).max(T::zero()).sqrt();
            let qj = delta.dot(&(&fits[j].fisher * &delta)).max(T::zero()).sqrt();
            let d = half * (qi + qj);
            distances[(i, j)] = d;
            distances[(j, i)] = d;
        }
    }
    let mds = classical_mds(&distances, 2.min(n))?;
    Ok(SeizureComparison { distances, mds })
}
