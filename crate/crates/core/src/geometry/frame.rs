//! Orthonormal frame of Sym(p) and coordinate conversion at the identity.
//!
//! Frame elements are indexed in lexicographic order over pairs `(q, r)` with
//! `q ≤ r`, zero-based: index 0 is `(0, 0)`, index 1 is `(0, 1)`, and the last
//! index `m − 1` is `(p − 1, p − 1)`, where `m = p(p + 1)/2`.
//!
//! Diagonal elements are `e_q e_qᵀ`; off-diagonal ones are
//! `(√2/2)(e_q e_rᵀ + e_r e_qᵀ)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::SymMatrix;
use crate::scalar::Scalar;

/// Dimension `m = p(p + 1)/2` of the tangent space of SPD(p).
#[inline]
pub const fn frame_dim(p: usize) -> usize {
    p * (p + 1) / 2
}

/// A frame slot, i.e. an unordered matrix position `(q, r)` with `q ≤ r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FrameIndex {
    pub q: usize,
    pub r: usize,
}

impl FrameIndex {
    pub fn from_linear(i: usize, p: usize) -> Result<Self> {
        let m = frame_dim(p);
        if i >= m {
            return Err(Error::IndexOutOfRange { index: i, len: m });
        }
        let mut rem = i;
        for q in 0..p {
            let row_len = p - q;
            if rem < row_len {
                return Ok(Self { q, r: q + rem });
            }
            rem -= row_len;
        }
        unreachable!("index checked against frame dimension")
    }

    pub fn to_linear(self, p: usize) -> usize {
        // rows 0..q hold p, p-1, ..., p-q+1 slots
        self.q * p - self.q * self.q.saturating_sub(1) / 2 + (self.r - self.q)
    }

    pub fn all(p: usize) -> impl Iterator<Item = FrameIndex> {
        (0..p).flat_map(move |q| (q..p).map(move |r| FrameIndex { q, r }))
    }
}

/// Euclidean frame element `E_qr` of Sym(p).
pub fn basis_element<T: Scalar>(p: usize, idx: FrameIndex) -> SymMatrix<T> {
    let mut m = DMatrix::zeros(p, p);
    if idx.q == idx.r {
        m[(idx.q, idx.q)] = T::one();
    } else {
        let w = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        m[(idx.q, idx.r)] = w;
        m[(idx.r, idx.q)] = w;
    }
    SymMatrix::symmetrize(m)
}

/// Coordinates `tr(V E_i)` of `v` in the Euclidean frame.
pub fn euclidean_coords<T: Scalar>(v: &SymMatrix<T>) -> DVector<T> {
    let p = v.dim();
    let a = v.as_matrix();
    let sqrt2 = T::lit(std::f64::consts::SQRT_2);
    let mut out = DVector::zeros(frame_dim(p));
    for (i, idx) in FrameIndex::all(p).enumerate() {
        out[i] = if idx.q == idx.r {
            a[(idx.q, idx.q)]
        } else {
            a[(idx.q, idx.r)] * sqrt2
        };
    }
    out
}

/// Inverse of [`euclidean_coords`].
pub fn euclidean_from_coords<T: Scalar>(p: usize, v: &DVector<T>) -> Result<SymMatrix<T>> {
    let m = frame_dim(p);
    if v.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: v.len(),
        });
    }
    let w = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let mut a = DMatrix::zeros(p, p);
    for (i, idx) in FrameIndex::all(p).enumerate() {
        if idx.q == idx.r {
            a[(idx.q, idx.q)] = v[i];
        } else {
            a[(idx.q, idx.r)] = v[i] * w;
            a[(idx.r, idx.q)] = v[i] * w;
        }
    }
    Ok(SymMatrix::symmetrize(a))
}

/// Recovers `p` from `m = p(p + 1)/2`.
pub fn dim_from_frame(m: usize) -> Option<usize> {
    let mut p = 0;
    while frame_dim(p) < m {
        p += 1;
    }
    (frame_dim(p) == m).then_some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order() {
        let pairs: Vec<_> = FrameIndex::all(3).map(|i| (i.q, i.r)).collect();
        assert_eq!(pairs, vec![(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]);
        for (i, idx) in FrameIndex::all(5).enumerate() {
            assert_eq!(FrameIndex::from_linear(i, 5).unwrap(), idx);
            assert_eq!(idx.to_linear(5), i);
        }
        assert!(matches!(
            FrameIndex::from_linear(6, 3),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn off_diagonal_element() {
        let e: SymMatrix<f64> = basis_element(2, FrameIndex { q: 0, r: 1 });
        let h = std::f64::consts::SQRT_2 / 2.0;
        assert_eq!(e.row_major(), vec![0.0, h, h, 0.0]);
        let c = euclidean_coords(&e);
        assert!((c[0]).abs() < 1e-15 && (c[1] - 1.0).abs() < 1e-15 && c[2].abs() < 1e-15);
    }

    #[test]
    fn dims() {
        assert_eq!(frame_dim(15), 120);
        assert_eq!(dim_from_frame(120), Some(15));
        assert_eq!(dim_from_frame(7), None);
    }
}
