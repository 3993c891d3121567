//! Symmetric matrices, SPD points and the eigendecomposition kernel behind
//! every matrix function used by the geometries.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default positive-definiteness threshold, relative to the largest eigenvalue.
pub const DEFAULT_REL_EPS: f64 = 1e-12;

/// A real symmetric `p × p` matrix. Symmetry is exact: construction averages
/// the input with its transpose.
#[derive(Clone, PartialEq)]
pub struct SymMatrix<T: Scalar> {
    data: DMatrix<T>,
}

impl<T: Scalar> SymMatrix<T> {
    /// Symmetrizes `m` as `(m + mᵀ) / 2`.
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Dimension("matrix dimension must be positive".into()));
        }
        Ok(Self::symmetrize(m))
    }

    pub(crate) fn symmetrize(m: DMatrix<T>) -> Self {
        let half = T::lit(0.5);
        let p = m.nrows();
        let data = DMatrix::from_fn(p, p, |i, j| {
            if i == j {
                m[(i, i)]
            } else {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                (m[(a, b)] + m[(b, a)]) * half
            }
        });
        Self { data }
    }

    pub fn from_fn(p: usize, f: impl FnMut(usize, usize) -> T) -> Self {
        Self::symmetrize(DMatrix::from_fn(p, p, f))
    }

    pub fn from_row_slice(p: usize, data: &[T]) -> Result<Self> {
        if data.len() != p * p {
            return Err(Error::DimensionMismatch {
                expected: p * p,
                found: data.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(p, p, data))
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            data: DMatrix::zeros(p, p),
        }
    }

    pub fn identity(p: usize) -> Self {
        Self {
            data: DMatrix::identity(p, p),
        }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        Self {
            data: DMatrix::from_diagonal(&DVector::from_column_slice(d)),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.data
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.norm()
    }

    pub fn trace(&self) -> T {
        self.data.trace()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            data: &self.data - &other.data,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            data: &self.data * s,
        }
    }

    /// `A · self · Aᵀ`, re-symmetrized.
    pub fn congruence(&self, a: &DMatrix<T>) -> Self {
        Self::symmetrize(a * &self.data * a.transpose())
    }

    pub fn row_major(&self) -> Vec<T> {
        let p = self.dim();
        (0..p * p).map(|k| self.data[(k / p, k % p)]).collect()
    }

    pub fn eigen(&self) -> Spectral<T> {
        let eig = self.data.clone().symmetric_eigen();
        Spectral {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    pub(crate) fn check_dim(&self, p: usize) -> Result<()> {
        if self.dim() == p {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: p,
                found: self.dim(),
            })
        }
    }
}

impl<T: Scalar> fmt::Debug for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix{}", self.data)
    }
}

/// Eigendecomposition `S = Q Λ Qᵀ` of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct Spectral<T: Scalar> {
    pub values: DVector<T>,
    pub vectors: DMatrix<T>,
}

impl<T: Scalar> Spectral<T> {
    /// `Q · diag(f(λ)) · Qᵀ`, re-symmetrized.
    pub fn apply(&self, f: impl Fn(T) -> T) -> SymMatrix<T> {
        let scaled = DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| {
            self.vectors[(i, j)] * f(self.values[j])
        });
        SymMatrix::symmetrize(scaled * self.vectors.transpose())
    }

    pub fn max_value(&self) -> T {
        self.values.max()
    }

    /// Returns the first eigenvalue not above `rel_eps · λ_max`, if any.
    pub fn first_non_positive(&self, rel_eps: T) -> Option<(usize, T)> {
        let max = self.max_value();
        let threshold = if max > T::zero() {
            max * rel_eps
        } else {
            T::zero()
        };
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v <= threshold)
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, &v)| (i, v))
    }

    fn require_positive(&self, rel_eps: T) -> Result<()> {
        match self.first_non_positive(rel_eps) {
            Some((index, value)) => Err(Error::NonPositiveEigenvalue {
                index,
                value: value.to_f64_lossy(),
            }),
            None => Ok(()),
        }
    }
}

/// Scalar functions lifted to symmetric matrices through the spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFn {
    Exp,
    Log,
    Sqrt,
    InvSqrt,
}

/// Applies `fun` to `s` via its symmetric eigendecomposition. `Log`, `Sqrt` and
/// `InvSqrt` require every eigenvalue above `1e-12 · λ_max`.
pub fn sym_matrix_fn<T: Scalar>(s: &SymMatrix<T>, fun: MatrixFn) -> Result<SymMatrix<T>> {
    let spec = s.eigen();
    apply_fn(&spec, fun, T::lit(DEFAULT_REL_EPS))
}

pub(crate) fn apply_fn<T: Scalar>(
    spec: &Spectral<T>,
    fun: MatrixFn,
    rel_eps: T,
) -> Result<SymMatrix<T>> {
    match fun {
        MatrixFn::Exp => Ok(spec.apply(|x| x.exp())),
        MatrixFn::Log => {
            spec.require_positive(rel_eps)?;
            Ok(spec.apply(|x| x.ln()))
        }
        MatrixFn::Sqrt => {
            spec.require_positive(rel_eps)?;
            Ok(spec.apply(|x| x.sqrt()))
        }
        MatrixFn::InvSqrt => {
            spec.require_positive(rel_eps)?;
            Ok(spec.apply(|x| T::one() / x.sqrt()))
        }
    }
}

/// Square root, inverse square root and inverse of a positive-definite matrix.
#[derive(Debug)]
pub(crate) struct Roots<T: Scalar> {
    pub sqrt: DMatrix<T>,
    pub inv_sqrt: DMatrix<T>,
    pub inv: DMatrix<T>,
}

#[derive(Debug)]
struct Factors<T: Scalar> {
    spectral: Spectral<T>,
    roots: std::result::Result<Roots<T>, (usize, f64)>,
}

impl<T: Scalar> Factors<T> {
    fn compute(m: &SymMatrix<T>, rel_eps: T) -> Self {
        let spectral = m.eigen();
        let roots = match spectral.first_non_positive(rel_eps) {
            Some((i, v)) => Err((i, v.to_f64_lossy())),
            None => Ok(Roots {
                sqrt: spectral.apply(|x| x.sqrt()).into_matrix(),
                inv_sqrt: spectral.apply(|x| T::one() / x.sqrt()).into_matrix(),
                inv: spectral.apply(|x| T::one() / x).into_matrix(),
            }),
        };
        Self { spectral, roots }
    }
}

/// A point of the model space: a symmetric matrix which is positive definite
/// when built with [`SpdPoint::new`].
///
/// Euclidean-geometry results may leave SPD(p); such points are built with
/// [`SpdPoint::ambient`] and report `is_pd() == false`. Affine-invariant
/// operations on them fail with [`Error::NonPositiveEigenvalue`].
///
/// The eigendecomposition and matrix roots are computed once and shared
/// between clones.
#[derive(Clone)]
pub struct SpdPoint<T: Scalar> {
    matrix: SymMatrix<T>,
    rel_eps: T,
    factors: OnceLock<Arc<Factors<T>>>,
}

impl<T: Scalar> SpdPoint<T> {
    /// Validates positive definiteness with the default relative threshold.
    pub fn new(matrix: SymMatrix<T>) -> Result<Self> {
        Self::with_tolerance(matrix, T::lit(DEFAULT_REL_EPS))
    }

    pub fn with_tolerance(matrix: SymMatrix<T>, rel_eps: T) -> Result<Self> {
        let point = Self::ambient_with(matrix, rel_eps);
        if let Err((index, value)) = &point.factors().roots {
            return Err(Error::NonPositiveEigenvalue {
                index: *index,
                value: *value,
            });
        }
        Ok(point)
    }

    /// Wraps a symmetric matrix without checking positive definiteness.
    pub fn ambient(matrix: SymMatrix<T>) -> Self {
        Self::ambient_with(matrix, T::lit(DEFAULT_REL_EPS))
    }

    fn ambient_with(matrix: SymMatrix<T>, rel_eps: T) -> Self {
        Self {
            matrix,
            rel_eps,
            factors: OnceLock::new(),
        }
    }

    pub fn from_row_slice(p: usize, data: &[T]) -> Result<Self> {
        Self::new(SymMatrix::from_row_slice(p, data)?)
    }

    pub fn identity(p: usize) -> Self {
        Self::ambient(SymMatrix::identity(p))
    }

    pub fn from_diagonal(d: &[T]) -> Result<Self> {
        Self::new(SymMatrix::from_diagonal(d))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &SymMatrix<T> {
        &self.matrix
    }

    pub fn is_pd(&self) -> bool {
        self.factors().roots.is_ok()
    }

    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.factors().spectral.values
    }

    pub fn spectral(&self) -> &Spectral<T> {
        &self.factors().spectral
    }

    fn factors(&self) -> &Factors<T> {
        self.factors
            .get_or_init(|| Arc::new(Factors::compute(&self.matrix, self.rel_eps)))
    }

    pub(crate) fn roots(&self) -> Result<&Roots<T>> {
        self.factors()
            .roots
            .as_ref()
            .map_err(|&(index, value)| Error::NonPositiveEigenvalue { index, value })
    }

    pub fn sqrt(&self) -> Result<&DMatrix<T>> {
        Ok(&self.roots()?.sqrt)
    }

    pub fn inv_sqrt(&self) -> Result<&DMatrix<T>> {
        Ok(&self.roots()?.inv_sqrt)
    }

    pub fn inverse(&self) -> Result<&DMatrix<T>> {
        Ok(&self.roots()?.inv)
    }
}

impl<T: Scalar> PartialEq for SpdPoint<T> {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl<T: Scalar> fmt::Debug for SpdPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpdPoint")
            .field("matrix", &self.matrix)
            .finish()
    }
}
