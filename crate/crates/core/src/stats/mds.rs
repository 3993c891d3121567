use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Classical (Torgerson) multidimensional scaling output.
#[derive(Clone, Debug)]
pub struct MdsResult<T: Scalar> {
    /// `n × d` embedding, one row per object.
    pub coords: DMatrix<T>,
    /// All eigenvalues of the double-centred Gram matrix, descending.
    pub eigenvalues: DVector<T>,
    /// Share of the positive eigenvalue mass carried by the top `d` eigenvalues.
    pub proportion: T,
}

/// Eigenpairs of a symmetric matrix sorted by decreasing eigenvalue.
pub(crate) fn sorted_eigen<T: Scalar>(m: DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Embeds a distance matrix in `d` dimensions with `B = −½ J D⁽²⁾ J`.
///
/// Negative eigenvalues contribute neither coordinates nor denominator mass
/// to `proportion`. When every eigenvalue is zero (all objects coincide) the
/// proportion is reported as 1.
pub fn classical_mds<T: Scalar>(dist: &DMatrix<T>, d: usize) -> Result<MdsResult<T>> {
    let n = dist.nrows();
    if dist.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: dist.ncols(),
        });
    }
    if d > n {
        return Err(Error::Dimension(format!(
            "cannot embed {n} objects in {d} dimensions"
        )));
    }
    let scale = dist.amax();
    let tol = T::lit(1e-9) * (scale + T::one());
    for i in 0..n {
        if dist[(i, i)].abs() > tol {
            return Err(Error::Format(format!(
                "distance matrix diagonal entry {i} is not zero"
            )));
        }
        for j in 0..n {
            if dist[(i, j)] < T::zero() || (dist[(i, j)] - dist[(j, i)]).abs() > tol {
                return Err(Error::Format(format!(
                    "distance matrix entry ({i}, {j}) is negative or asymmetric"
                )));
            }
        }
    }

    let nf = T::from_usize_lossy(n);
    let sq = dist.map(|x| x * x);
    let row_means = DVector::from_fn(n, |i, _| sq.row(i).sum() / nf);
    let grand = row_means.sum() / nf;
    let half = T::lit(0.5);
    let b = DMatrix::from_fn(n, n, |i, j| {
        -half * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    let b = (&b + b.transpose()) * half;

    let (values, vectors) = sorted_eigen(b);
    let coords = DMatrix::from_fn(n, d, |i, j| {
        let l = values[j];
        if l > T::zero() {
            vectors[(i, j)] * l.sqrt()
        } else {
            T::zero()
        }
    });
    let positive = |v: &T| if *v > T::zero() { *v } else { T::zero() };
    let total = values.iter().map(positive).fold(T::zero(), |a, b| a + b);
    let top = values
        .iter()
        .take(d)
        .map(positive)
        .fold(T::zero(), |a, b| a + b);
    let proportion = if total > T::zero() {
        top / total
    } else {
        T::one()
    };
    Ok(MdsResult {
        coords,
        eigenvalues: values,
        proportion,
    })
}
