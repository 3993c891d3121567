//! Closed-form Riemannian operations on Sym(p) with the Euclidean (Frobenius)
//! metric and on SPD(p) with the affine-invariant metric
//! `g_S(V, W) = tr(S⁻¹ V S⁻¹ W)`.
//!
//! Tangent vectors are symmetric matrices; the base point is always passed
//! explicitly. Coordinates are taken in the parallel orthonormal frame
//! `ω_i(S) = S^{1/2} E_i S^{1/2}` (affine) or `E_i` (Euclidean), see
//! [`frame`] for the index order.

mod frame;
mod matrix;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use frame::{
    basis_element, dim_from_frame, euclidean_coords, euclidean_from_coords, frame_dim, FrameIndex,
};
pub use matrix::{sym_matrix_fn, MatrixFn, SpdPoint, Spectral, SymMatrix, DEFAULT_REL_EPS};

/// A tangent vector: a symmetric matrix attached to an explicitly supplied base point.
pub type Tangent<T> = SymMatrix<T>;

/// Riemannian structure used for the model space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Geometry {
    #[serde(rename = "euclidean")]
    Euclidean,
    #[serde(rename = "affine")]
    AffineInvariant,
}

impl std::str::FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "euc" => Ok(Geometry::Euclidean),
            "affine" | "affine-invariant" | "affine_invariant" | "ai" => {
                Ok(Geometry::AffineInvariant)
            }
            other => Err(Error::Format(format!("unknown geometry '{other}'"))),
        }
    }
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Geometry::Euclidean => "euclidean",
            Geometry::AffineInvariant => "affine",
        })
    }
}

impl Geometry {
    /// Maps `v ∈ T_S` to the identity tangent space where the metric is
    /// Frobenius: `S^{-1/2} V S^{-1/2}` for the affine metric, `V` otherwise.
    fn whiten<T: Scalar>(self, s: &SpdPoint<T>, v: &Tangent<T>) -> Result<SymMatrix<T>> {
        v.check_dim(s.dim())?;
        match self {
            Geometry::Euclidean => Ok(v.clone()),
            Geometry::AffineInvariant => Ok(v.congruence(s.inv_sqrt()?)),
        }
    }

    fn unwhiten<T: Scalar>(self, s: &SpdPoint<T>, w: SymMatrix<T>) -> Result<Tangent<T>> {
        match self {
            Geometry::Euclidean => Ok(w),
            Geometry::AffineInvariant => Ok(w.congruence(s.sqrt()?)),
        }
    }

    pub fn inner<T: Scalar>(self, s: &SpdPoint<T>, v: &Tangent<T>, w: &Tangent<T>) -> Result<T> {
        let a = self.whiten(s, v)?;
        let b = self.whiten(s, w)?;
        Ok(a.as_matrix().dot(b.as_matrix()))
    }

    pub fn norm<T: Scalar>(self, s: &SpdPoint<T>, v: &Tangent<T>) -> Result<T> {
        Ok(self.whiten(s, v)?.frobenius_norm())
    }

    /// Geodesic distance.
    pub fn dist<T: Scalar>(self, s1: &SpdPoint<T>, s2: &SpdPoint<T>) -> Result<T> {
        s2.matrix().check_dim(s1.dim())?;
        match self {
            Geometry::Euclidean => Ok(s1.matrix().sub(s2.matrix()).frobenius_norm()),
            Geometry::AffineInvariant => {
                s2.inv_sqrt()?;
                let w = s2.matrix().congruence(s1.inv_sqrt()?);
                let spec = w.eigen();
                if let Some((index, value)) = spec.first_non_positive(T::lit(DEFAULT_REL_EPS)) {
                    return Err(Error::NonPositiveEigenvalue {
                        index,
                        value: value.to_f64_lossy(),
                    });
                }
                Ok(spec
                    .values
                    .iter()
                    .map(|&l| l.ln() * l.ln())
                    .fold(T::zero(), |a, b| a + b)
                    .sqrt())
            }
        }
    }

    /// Exponential map. Euclidean results are not checked for positive
    /// definiteness; inspect [`SpdPoint::is_pd`] on the returned point.
    pub fn exp_map<T: Scalar>(self, s: &SpdPoint<T>, v: &Tangent<T>) -> Result<SpdPoint<T>> {
        v.check_dim(s.dim())?;
        match self {
            Geometry::Euclidean => Ok(SpdPoint::ambient(s.matrix().add(v))),
            Geometry::AffineInvariant => {
                let w = self.whiten(s, v)?;
                let e = sym_matrix_fn(&w, MatrixFn::Exp)?;
                if e.as_matrix().iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonPositiveEigenvalue {
                        index: 0,
                        value: f64::NAN,
                    });
                }
                SpdPoint::new(self.unwhiten(s, e)?)
            }
        }
    }

    /// Logarithm map `Log_{s1}(s2)`, the inverse of [`Geometry::exp_map`].
    pub fn log_map<T: Scalar>(self, s1: &SpdPoint<T>, s2: &SpdPoint<T>) -> Result<Tangent<T>> {
        s2.matrix().check_dim(s1.dim())?;
        match self {
            Geometry::Euclidean => Ok(s2.matrix().sub(s1.matrix())),
            Geometry::AffineInvariant => {
                s2.inv_sqrt()?;
                let w = s2.matrix().congruence(s1.inv_sqrt()?);
                let l = sym_matrix_fn(&w, MatrixFn::Log)?;
                self.unwhiten(s1, l)
            }
        }
    }

    /// Parallel transport of `v ∈ T_{s1}` to `T_{s2}` along the connecting geodesic.
    ///
    /// Affine case: `M V Mᵀ` with `M = (S2 S1⁻¹)^{1/2}` evaluated in the
    /// symmetric form `S1^{1/2} (S1^{-1/2} S2 S1^{-1/2})^{1/2} S1^{-1/2}`.
    pub fn parallel_transport<T: Scalar>(
        self,
        s1: &SpdPoint<T>,
        s2: &SpdPoint<T>,
        v: &Tangent<T>,
    ) -> Result<Tangent<T>> {
        v.check_dim(s1.dim())?;
        s2.matrix().check_dim(s1.dim())?;
        match self {
            Geometry::Euclidean => Ok(v.clone()),
            Geometry::AffineInvariant => {
                s2.inv_sqrt()?;
                let w = s2.matrix().congruence(s1.inv_sqrt()?);
                let root = sym_matrix_fn(&w, MatrixFn::Sqrt)?;
                let m = s1.sqrt()? * root.as_matrix() * s1.inv_sqrt()?;
                Ok(v.congruence(&m))
            }
        }
    }

    /// Frame element `ω_i(S)`; `i` is zero-based.
    pub fn frame<T: Scalar>(self, s: &SpdPoint<T>, i: usize) -> Result<Tangent<T>> {
        let idx = FrameIndex::from_linear(i, s.dim())?;
        self.unwhiten(s, basis_element(s.dim(), idx))
    }

    /// Coordinates `g_S(V, ω_i(S))` of `v` in the frame at `s`.
    pub fn to_coords<T: Scalar>(self, s: &SpdPoint<T>, v: &Tangent<T>) -> Result<DVector<T>> {
        Ok(euclidean_coords(&self.whiten(s, v)?))
    }

    /// Inverse of [`Geometry::to_coords`].
    pub fn from_coords<T: Scalar>(self, s: &SpdPoint<T>, v: &DVector<T>) -> Result<Tangent<T>> {
        let w = euclidean_from_coords(s.dim(), v)?;
        self.unwhiten(s, w)
    }

    /// Coordinates at `to` of the transport of `v ∈ T_{from}`.
    pub fn transported_coords<T: Scalar>(
        self,
        from: &SpdPoint<T>,
        to: &SpdPoint<T>,
        v: &Tangent<T>,
    ) -> Result<DVector<T>> {
        let moved = self.parallel_transport(from, to, v)?;
        self.to_coords(to, &moved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    const E: f64 = std::f64::consts::E;

    fn diag(d: &[f64]) -> SpdPoint<f64> {
        SpdPoint::from_diagonal(d).unwrap()
    }

    fn close(a: &SymMatrix<f64>, b: &SymMatrix<f64>, tol: f64) -> bool {
        (a.as_matrix() - b.as_matrix()).norm() <= tol
    }

    #[test]
    fn inner_products() {
        let i2 = diag(&[1.0, 1.0]);
        let id = SymMatrix::identity(2);
        assert_eq!(
            Geometry::Euclidean
                .inner(&diag(&[3.0, 5.0]), &id, &id)
                .unwrap(),
            2.0
        );
        let v = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!((Geometry::AffineInvariant.inner(&i2, &v, &v).unwrap() - 2.0).abs() < 1e-15);
        let two = SymMatrix::from_diagonal(&[2.0, 2.0]);
        let got = Geometry::AffineInvariant
            .inner(&diag(&[2.0, 2.0]), &two, &two)
            .unwrap();
        assert!((got - 2.0).abs() < 1e-14);
        assert!(matches!(
            Geometry::Euclidean.inner(&i2, &SymMatrix::identity(3), &id),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distances() {
        let d = Geometry::Euclidean
            .dist(&diag(&[1.0, 1.0]), &diag(&[3.0, 1.0]))
            .unwrap();
        assert_eq!(d, 2.0);
        let d = Geometry::AffineInvariant
            .dist(&diag(&[1.0, 1.0]), &diag(&[E * E, 1.0]))
            .unwrap();
        assert!((d - 2.0).abs() < 1e-14);
        let d = Geometry::AffineInvariant
            .dist(&diag(&[2.0, 3.0]), &diag(&[2.0, 3.0]))
            .unwrap();
        assert!(d.abs() < 1e-14);
    }

    #[test]
    fn exp_maps() {
        let g = Geometry::AffineInvariant;
        let got = g
            .exp_map(&diag(&[1.0, 1.0]), &SymMatrix::from_diagonal(&[1.0, -1.0]))
            .unwrap();
        assert!(close(
            got.matrix(),
            &SymMatrix::from_diagonal(&[E, 1.0 / E]),
            1e-14
        ));

        let got = Geometry::Euclidean
            .exp_map(&diag(&[1.0, 1.0]), &SymMatrix::from_diagonal(&[-2.0, 0.0]))
            .unwrap();
        assert_eq!(got.matrix(), &SymMatrix::from_diagonal(&[-1.0, 1.0]));
        assert!(!got.is_pd());
    }

    #[test]
    fn log_maps() {
        let v = Geometry::Euclidean
            .log_map(&diag(&[1.0, 1.0]), &diag(&[3.0, 2.0]))
            .unwrap();
        assert_eq!(v, SymMatrix::from_diagonal(&[2.0, 1.0]));
        let s1 = diag(&[4.0, 1.0]);
        let s2 = diag(&[16.0, 1.0]);
        let v = Geometry::AffineInvariant.log_map(&s1, &s2).unwrap();
        assert!(close(
            &v,
            &SymMatrix::from_diagonal(&[4.0 * 4f64.ln(), 0.0]),
            1e-13
        ));
        let back = Geometry::AffineInvariant.exp_map(&s1, &v).unwrap();
        assert!(close(back.matrix(), s2.matrix(), 1e-12));
    }

    #[test]
    fn transports() {
        let id = SymMatrix::identity(2);
        let got = Geometry::AffineInvariant
            .parallel_transport(&diag(&[1.0, 1.0]), &diag(&[4.0, 1.0]), &id)
            .unwrap();
        assert!(close(&got, &SymMatrix::from_diagonal(&[4.0, 1.0]), 1e-14));
        let v = SymMatrix::from_row_slice(2, &[1.0, 2.0, 2.0, -1.0]).unwrap();
        let got = Geometry::Euclidean
            .parallel_transport(&diag(&[1.0, 2.0]), &diag(&[5.0, 1.0]), &v)
            .unwrap();
        assert_eq!(got, v);
    }

    #[test]
    fn frames_and_coords() {
        let h = std::f64::consts::SQRT_2 / 2.0;
        let s = diag(&[3.0, 7.0]);
        let e = Geometry::Euclidean.frame(&s, 1).unwrap();
        assert_eq!(e.row_major(), vec![0.0, h, h, 0.0]);
        let i3 = SpdPoint::<f64>::identity(3);
        for i in 0..6 {
            let a = Geometry::AffineInvariant.frame(&i3, i).unwrap();
            let b = Geometry::Euclidean.frame(&i3, i).unwrap();
            assert!(close(&a, &b, 1e-15));
        }
        assert!(matches!(
            Geometry::Euclidean.frame(&s, 3),
            Err(Error::IndexOutOfRange { .. })
        ));

        let c = Geometry::AffineInvariant
            .to_coords(&SpdPoint::<f64>::identity(2), &SymMatrix::identity(2))
            .unwrap();
        assert_eq!(c.as_slice(), &[1.0, 0.0, 1.0]);
        let off = SymMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, h, h, 0.0])).unwrap();
        let c = Geometry::Euclidean.to_coords(&s, &off).unwrap();
        assert!((c[1] - 1.0).abs() < 1e-15 && c[0] == 0.0 && c[2] == 0.0);
        assert!(matches!(
            Geometry::Euclidean.from_coords(&s, &DVector::from_vec(vec![1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn geometry_parses() {
        assert_eq!(
            "affine".parse::<Geometry>().unwrap(),
            Geometry::AffineInvariant
        );
        assert_eq!(
            "Euclidean".parse::<Geometry>().unwrap(),
            Geometry::Euclidean
        );
        assert!("hyperbolic".parse::<Geometry>().is_err());
        assert_eq!(
            serde_json::to_string(&Geometry::AffineInvariant).unwrap(),
            "\"affine\""
        );
    }

    #[test]
    fn works_in_single_precision() {
        let s = SpdPoint::<f32>::from_diagonal(&[1.0, 4.0]).unwrap();
        let t = SpdPoint::<f32>::from_diagonal(&[2.0, 1.0]).unwrap();
        let g = Geometry::AffineInvariant;
        let v = g.log_map(&s, &t).unwrap();
        let back = g.exp_map(&s, &v).unwrap();
        assert!((back.matrix().as_matrix() - t.matrix().as_matrix()).norm() < 1e-5);
    }
}
