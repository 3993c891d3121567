use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, SpdPoint};
use crate::scalar::Scalar;

/// Lower-triangular factor `L` with `L Lᵀ ≈ Σ`, used to draw `N(0, Σ)` vectors.
#[derive(Clone, Debug)]
pub struct NoiseFactor<T: Scalar> {
    lower: DMatrix<T>,
}

impl<T: Scalar> NoiseFactor<T> {
    /// Cholesky factor of `sigma`. PSD-singular inputs get a growing diagonal
    /// jitter; eigenvalues below `−1e-10 · ‖Σ‖` are rejected.
    pub fn new(sigma: &DMatrix<T>) -> Result<Self> {
        let m = sigma.nrows();
        if sigma.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: sigma.ncols(),
            });
        }
        let scale = sigma.norm();
        if scale == T::zero() {
            return Ok(Self {
                lower: DMatrix::zeros(m, m),
            });
        }
        let sym = (sigma + sigma.transpose()) * T::lit(0.5);
        if let Some(c) = Cholesky::new(sym.clone()) {
            return Ok(Self { lower: c.l() });
        }
        let min_eig = sym.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -T::lit(1e-10) * scale {
            return Err(Error::NotPsd {
                min_eigenvalue: min_eig.to_f64_lossy(),
            });
        }
        let mut jitter = scale * T::lit(1e-14);
        for _ in 0..12 {
            let mut shifted = sym.clone();
            for i in 0..m {
                shifted[(i, i)] += jitter;
            }
            if let Some(c) = Cholesky::new(shifted) {
                return Ok(Self { lower: c.l() });
            }
            jitter *= T::lit(10.0);
        }
        Err(Error::NotPsd {
            min_eigenvalue: min_eig.to_f64_lossy(),
        })
    }

    /// Independent coordinates with standard deviations `sd`.
    pub fn diagonal(sd: &DVector<T>) -> Self {
        Self {
            lower: DMatrix::from_diagonal(sd),
        }
    }

    pub fn isotropic(m: usize, sd: T) -> Self {
        Self {
            lower: DMatrix::identity(m, m) * sd,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &DMatrix<T> {
        &self.lower
    }

    /// One draw of `N(0, Σ)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<T> {
        let z = DVector::from_fn(self.dim(), |_, _| {
            T::lit(rng.sample::<f64, _>(StandardNormal))
        });
        &self.lower * z
    }
}

/// Draws from the wrapped Gaussian centred at `s`: `Y ~ N(w, Σ)` in frame
/// coordinates at `s`, pushed through the exponential map.
pub fn sample_wrapped_gaussian<T: Scalar, R: Rng + ?Sized>(
    g: Geometry,
    s: &SpdPoint<T>,
    w: &DVector<T>,
    sigma: &DMatrix<T>,
    rng: &mut R,
) -> Result<SpdPoint<T>> {
    let factor = NoiseFactor::new(sigma)?;
    sample_with_factor(g, s, w, &factor, rng)
}

/// As [`sample_wrapped_gaussian`] with a precomputed noise factor.
pub fn sample_with_factor<T: Scalar, R: Rng + ?Sized>(
    g: Geometry,
    s: &SpdPoint<T>,
    w: &DVector<T>,
    factor: &NoiseFactor<T>,
    rng: &mut R,
) -> Result<SpdPoint<T>> {
    if w.len() != factor.dim() {
        return Err(Error::DimensionMismatch {
            expected: factor.dim(),
            found: w.len(),
        });
    }
    let y = w + factor.sample(rng);
    let u = g.from_coords(s, &y)?;
    g.exp_map(s, &u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_at_centre() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = SpdPoint::from_row_slice(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let x = sample_wrapped_gaussian(
            Geometry::AffineInvariant,
            &s,
            &DVector::zeros(3),
            &DMatrix::zeros(3, 3),
            &mut rng,
        )
        .unwrap();
        assert!((x.matrix().as_matrix() - s.matrix().as_matrix()).norm() < 1e-14);
    }

    #[test]
    fn zero_noise_is_deterministic_exp() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = SpdPoint::from_row_slice(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let w = DVector::from_vec(vec![0.3, -0.2, 0.1]);
        for g in [Geometry::Euclidean, Geometry::AffineInvariant] {
            let x = sample_wrapped_gaussian(g, &s, &w, &DMatrix::zeros(3, 3), &mut rng).unwrap();
            let want = g.exp_map(&s, &g.from_coords(&s, &w).unwrap()).unwrap();
            assert_eq!(x.matrix(), want.matrix());
        }
    }

    #[test]
    fn singular_psd_uses_jitter_and_indefinite_is_rejected() {
        let rank_one = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let f = NoiseFactor::new(&rank_one).unwrap();
        let back = f.lower() * f.lower().transpose();
        assert!((back - rank_one).norm() < 1e-6);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        assert!(matches!(NoiseFactor::new(&bad), Err(Error::NotPsd { .. })));
    }
}
