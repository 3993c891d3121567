//! Tangent-vector diagnostics for a covariance time series: direction
//! reversal statistics, tangent PCA at the identity and pairwise distances.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{frame_dim, Geometry, SpdPoint, Tangent};
use crate::scalar::Scalar;
use crate::stats::mds::sorted_eigen;

fn directions<T: Scalar>(g: Geometry, points: &[SpdPoint<T>]) -> Result<Vec<Tangent<T>>> {
    points.windows(2).map(|w| g.log_map(&w[0], &w[1])).collect()
}

/// Cosine of the angle between each step `V_k = Log_{S_k}(S_{k+1})` and the
/// previous step transported to `S_k`, for `k = 1..n−2` (zero-based).
pub fn direction_cosines<T: Scalar>(g: Geometry, points: &[SpdPoint<T>]) -> Result<Vec<T>> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            available: points.len(),
        });
    }
    let dirs = directions(g, points)?;
    // steps between numerically identical points come out at rounding level
    let zero = T::default_epsilon() * T::lit(100.0);
    let mut norms = Vec::with_capacity(dirs.len());
    for (i, v) in dirs.iter().enumerate() {
        let n = g.norm(&points[i], v)?;
        if n <= zero {
            return Err(Error::ZeroTangent { index: i });
        }
        norms.push(n);
    }
    (1..dirs.len())
        .map(|k| {
            let prev = g.parallel_transport(&points[k - 1], &points[k], &dirs[k - 1])?;
            let prev_norm = g.norm(&points[k], &prev)?;
            Ok(g.inner(&points[k], &dirs[k], &prev)? / (norms[k] * prev_norm))
        })
        .collect()
}

/// Principal components of the step vectors transported to the identity.
#[derive(Clone, Debug)]
pub struct TangentPca<T: Scalar> {
    /// `(n − 1) × d` scores of the centred coordinates.
    pub scores: DMatrix<T>,
    /// All `m` covariance eigenvalues, descending.
    pub eigenvalues: DVector<T>,
    /// `m × d` principal axes.
    pub components: DMatrix<T>,
    /// Coordinate mean that was removed before projecting.
    pub mean: DVector<T>,
}

/// Coordinates, in the frame at the identity, of each step vector transported there.
pub fn identity_coords<T: Scalar>(g: Geometry, points: &[SpdPoint<T>]) -> Result<DMatrix<T>> {
    if points.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            available: points.len(),
        });
    }
    let p = points[0].dim();
    let id = SpdPoint::identity(p);
    let dirs = directions(g, points)?;
    let mut out = DMatrix::zeros(dirs.len(), frame_dim(p));
    for (i, v) in dirs.iter().enumerate() {
        let c = g.transported_coords(&points[i], &id, v)?;
        out.row_mut(i).copy_from(&c.transpose());
    }
    Ok(out)
}

/// PCA of the transported step vectors; the coordinates are centred and the
/// covariance uses divisor `n − 1` (the number of step vectors).
pub fn tangent_pca<T: Scalar>(
    g: Geometry,
    points: &[SpdPoint<T>],
    d: usize,
) -> Result<TangentPca<T>> {
    let x = identity_coords(g, points)?;
    let (rows, m) = x.shape();
    if d > m {
        return Err(Error::Dimension(format!(
            "requested {d} components of a {m}-dimensional space"
        )));
    }
    let mean = DVector::from_fn(m, |j, _| x.column(j).mean());
    let centred = DMatrix::from_fn(rows, m, |i, j| x[(i, j)] - mean[j]);
    let cov = centred.transpose() * &centred / T::from_usize_lossy(rows);
    let (eigenvalues, vectors) = sorted_eigen(cov);
    let components = vectors.columns(0, d).into_owned();
    let scores = &centred * &components;
    Ok(TangentPca {
        scores,
        eigenvalues,
        components,
        mean,
    })
}

/// Symmetric matrix of geodesic distances between all pairs of points.
pub fn pairwise_distances<T: Scalar>(g: Geometry, points: &[SpdPoint<T>]) -> Result<DMatrix<T>> {
    let n = points.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = g.dist(&points[i], &points[j])?;
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SymMatrix;

    fn geodesic(g: Geometry, n: usize) -> Vec<SpdPoint<f64>> {
        let s0 = SpdPoint::from_row_slice(2, &[2.0, 0.4, 0.4, 1.0]).unwrap();
        let v = SymMatrix::from_row_slice(2, &[0.3, 0.1, 0.1, -0.2]).unwrap();
        (0..n)
            .map(|k| g.exp_map(&s0, &v.scale(k as f64)).unwrap())
            .collect()
    }

    #[test]
    fn geodesic_cosines_are_one() {
        for g in [Geometry::Euclidean, Geometry::AffineInvariant] {
            let c = direction_cosines(g, &geodesic(g, 6)).unwrap();
            assert_eq!(c.len(), 4);
            assert!(c.iter().all(|x| (x - 1.0).abs() < 1e-10), "{c:?}");
        }
    }

    #[test]
    fn alternating_cosines_are_minus_one() {
        let a = SpdPoint::<f64>::from_row_slice(2, &[2.0, 0.4, 0.4, 1.0]).unwrap();
        let b = SpdPoint::from_diagonal(&[0.5, 3.0]).unwrap();
        let pts = vec![a.clone(), b.clone(), a, b];
        for g in [Geometry::Euclidean, Geometry::AffineInvariant] {
            let c = direction_cosines(g, &pts).unwrap();
            assert!(c.iter().all(|x| (x + 1.0).abs() < 1e-10), "{c:?}");
        }
    }

    #[test]
    fn zero_step_is_an_error() {
        let a = SpdPoint::from_diagonal(&[1.0, 2.0]).unwrap();
        let pts = vec![a.clone(), a.clone(), a];
        assert!(matches!(
            direction_cosines(Geometry::AffineInvariant, &pts),
            Err(Error::ZeroTangent { index: 0 })
        ));
    }

    #[test]
    fn geodesic_through_identity_has_no_variance() {
        let v = SymMatrix::from_row_slice(2, &[0.3, 0.1, 0.1, -0.2]).unwrap();
        let g = Geometry::AffineInvariant;
        let id = SpdPoint::identity(2);
        let pts: Vec<_> = (0..8)
            .map(|k| g.exp_map(&id, &v.scale(k as f64 - 3.0)).unwrap())
            .collect();
        let pca = tangent_pca(g, &pts, 2).unwrap();
        assert!(pca.eigenvalues.iter().all(|l: &f64| l.abs() < 1e-20));
        assert!(pca.scores.iter().all(|s: &f64| s.abs() < 1e-10));
    }

    #[test]
    fn distance_matrix_is_symmetric() {
        let pts = geodesic(Geometry::AffineInvariant, 4);
        let d = pairwise_distances(Geometry::AffineInvariant, &pts).unwrap();
        assert_eq!(d, d.transpose());
        assert!((d[(0, 2)] - 2.0 * d[(0, 1)]).abs() < 1e-10);
    }
}
