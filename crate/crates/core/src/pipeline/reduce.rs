use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Geometry, SpdPoint, SymMatrix};
use crate::model::{CovSeries, SeriesMeta};
use crate::scalar::Scalar;
use crate::stats::{frechet_mean_default, mds::sorted_eigen};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionKind {
    /// Project on the top eigenvectors of the mean covariance.
    VarianceMax,
    /// Keep a channel subset chosen greedily for a large mean minimum eigenvalue.
    GreedyMinEig,
}

impl std::str::FromStr for ReductionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "variance-max" | "variance" | "pca" => Ok(ReductionKind::VarianceMax),
            "greedy-min-eig" | "greedy-mineig" | "greedy" => Ok(ReductionKind::GreedyMinEig),
            other => Err(Error::Format(format!("unknown reduction '{other}'"))),
        }
    }
}

impl std::fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReductionKind::VarianceMax => "variance-max",
            ReductionKind::GreedyMinEig => "greedy-min-eig",
        })
    }
}

/// How raw `q × q` covariances are reduced to `p × p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionPlan<T: Scalar> {
    pub kind: ReductionKind,
    /// `p × q` matrix with `S_i = U S'_i Uᵀ`. For a channel subset its rows are
    /// the corresponding unit vectors.
    pub projection: DMatrix<T>,
    /// Selected channels, ascending (channel-subset plans only).
    pub channels: Vec<usize>,
    /// Share of the mean total variance kept.
    pub retained: T,
    /// Mean minimum eigenvalue of the selected submatrices (channel-subset plans only).
    pub objective: Option<T>,
}

impl<T: Scalar> ReductionPlan<T> {
    pub fn p(&self) -> usize {
        self.projection.nrows()
    }

    pub fn q(&self) -> usize {
        self.projection.ncols()
    }

    /// Rows of the projection as plain vectors, as recorded in series metadata.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.projection
            .row_iter()
            .map(|r| r.iter().map(|x| x.to_f64_lossy()).collect())
            .collect()
    }
}

fn mean_matrix<T: Scalar>(raw: &[SymMatrix<T>]) -> Result<DMatrix<T>> {
    let first = raw.first().ok_or(Error::InsufficientData {
        needed: 1,
        available: 0,
    })?;
    let q = first.dim();
    let mut sum = DMatrix::zeros(q, q);
    for s in raw {
        s.check_dim(q)?;
        sum += s.as_matrix();
    }
    Ok(sum / T::from_usize_lossy(raw.len()))
}

fn check_target(p: usize, q: usize) -> Result<()> {
    if p == 0 || p > q {
        return Err(Error::Dimension(format!(
            "cannot reduce {q} channels to dimension {p}"
        )));
    }
    Ok(())
}

fn ratio<T: Scalar>(kept: T, total: T) -> T {
    if total > T::zero() {
        kept / total
    } else {
        T::one()
    }
}

/// Rows of `U` are the `p` leading eigenvectors of the mean covariance, each
/// signed so that its largest-magnitude entry is positive.
pub fn plan_variance_max<T: Scalar>(raw: &[SymMatrix<T>], p: usize) -> Result<ReductionPlan<T>> {
    let mean = mean_matrix(raw)?;
    let q = mean.nrows();
    check_target(p, q)?;
    let (values, vectors) = sorted_eigen(mean);
    let mut projection = DMatrix::zeros(p, q);
    for j in 0..p {
        let mut v = vectors.column(j).into_owned();
        let lead = v
            .iter()
            .copied()
            .fold(T::zero(), |a, x| if x.abs() > a.abs() { x } else { a });
        if lead < T::zero() {
            v.neg_mut();
        }
        projection.set_row(j, &v.transpose());
    }
    let kept = values.iter().take(p).copied().fold(T::zero(), |a, b| a + b);
    let retained = ratio(kept, values.sum());
    Ok(ReductionPlan {
        kind: ReductionKind::VarianceMax,
        projection,
        channels: Vec::new(),
        retained,
        objective: None,
    })
}

fn submatrix<T: Scalar>(s: &DMatrix<T>, channels: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(channels.len(), channels.len(), |i, j| {
        s[(channels[i], channels[j])]
    })
}

/// `(1/n) Σ_i λ_min(S'_i(C))`.
pub fn min_eig_objective<T: Scalar>(raw: &[SymMatrix<T>], channels: &[usize]) -> T {
    let total = raw
        .iter()
        .map(|s| {
            submatrix(s.as_matrix(), channels)
                .symmetric_eigenvalues()
                .min()
        })
        .fold(T::zero(), |a, b| a + b);
    total / T::from_usize_lossy(raw.len())
}

/// Grows a channel set one channel at a time, each time adding the channel
/// that maximises the mean minimum eigenvalue; ties go to the lowest index.
pub fn plan_greedy_mineig<T: Scalar>(raw: &[SymMatrix<T>], p: usize) -> Result<ReductionPlan<T>> {
    let mean = mean_matrix(raw)?;
    let q = mean.nrows();
    check_target(p, q)?;
    let mut chosen: Vec<usize> = Vec::with_capacity(p);
    let mut objective = T::zero();
    while chosen.len() < p {
        let mut best: Option<(usize, T)> = None;
        for c in (0..q).filter(|c| !chosen.contains(c)) {
            let mut trial = chosen.clone();
            trial.push(c);
            trial.sort_unstable();
            let phi = min_eig_objective(raw, &trial);
            if best.is_none_or(|(_, b)| phi > b) {
                best = Some((c, phi));
            }
        }
        let (c, phi) = best.expect("p ≤ q leaves a candidate");
        chosen.push(c);
        chosen.sort_unstable();
        objective = phi;
    }
    let mut projection = DMatrix::zeros(p, q);
    for (i, &c) in chosen.iter().enumerate() {
        projection[(i, c)] = T::one();
    }
    let kept = chosen
        .iter()
        .map(|&c| mean[(c, c)])
        .fold(T::zero(), |a, b| a + b);
    let retained = ratio(kept, mean.trace());
    Ok(ReductionPlan {
        kind: ReductionKind::GreedyMinEig,
        projection,
        channels: chosen,
        retained,
        objective: Some(objective),
    })
}

/// Applies `plan` to every raw covariance and checks the results are SPD.
/// The series gets `dt = 1`; callers set the window length.
pub fn apply_reduction<T: Scalar>(
    plan: &ReductionPlan<T>,
    raw: &[SymMatrix<T>],
) -> Result<CovSeries<T>> {
    let points = raw
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.check_dim(plan.q()).map_err(|e| e.at_window(i))?;
            let reduced = match plan.kind {
                ReductionKind::VarianceMax => s.congruence(&plan.projection),
                ReductionKind::GreedyMinEig => {
                    SymMatrix::symmetrize(submatrix(s.as_matrix(), &plan.channels))
                }
            };
            SpdPoint::new(reduced).map_err(|e| e.at_window(i))
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = SeriesMeta {
        reduction: Some(plan.rows()),
        ..SeriesMeta::default()
    };
    CovSeries::with_meta(points, 1.0, meta)
}

/// Fréchet mean of the interictal series, used as the attractor of a seizure
/// series prepared with the same reduction.
pub fn pair_attractor<T: Scalar>(
    seizure: &CovSeries<T>,
    interictal: &CovSeries<T>,
    g: Geometry,
) -> Result<SpdPoint<T>> {
    if seizure.dim() != interictal.dim() {
        return Err(Error::DimensionMismatch {
            expected: seizure.dim(),
            found: interictal.dim(),
        });
    }
    if let (Some(a), Some(b)) = (&seizure.meta.reduction, &interictal.meta.reduction) {
        let same = a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| {
                x.len() == y.len() && x.iter().zip(y).all(|(u, v)| (u - v).abs() <= 1e-12)
            });
        if !same {
            return Err(Error::PlanMismatch);
        }
    }
    Ok(frechet_mean_default(g, interictal.points())?.mean)
}
