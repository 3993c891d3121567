use log::warn;
use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{Geometry, SpdPoint};
use crate::model::{
    build_dataset, DatasetRow, DiagParams, ModelKind, ModelParams, ScalarParams, TangentDataset,
};
use crate::scalar::Scalar;

/// Gram matrices with a condition number above this are solved by pseudoinverse.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Which coefficient groups are estimated; the others are held at zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Restriction {
    #[default]
    Full,
    /// No autoregressive terms (`α = 0`).
    NoAlpha,
    /// No mean reversion (`β = 0`).
    NoBeta,
}

impl Restriction {
    pub fn has_alpha(self) -> bool {
        self != Restriction::NoAlpha
    }

    pub fn has_beta(self) -> bool {
        self != Restriction::NoBeta
    }
}

impl std::str::FromStr for Restriction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "full" => Ok(Restriction::Full),
            "no-alpha" | "noalpha" => Ok(Restriction::NoAlpha),
            "no-beta" | "nobeta" => Ok(Restriction::NoBeta),
            other => Err(Error::Format(format!("unknown restriction '{other}'"))),
        }
    }
}

impl std::fmt::Display for Restriction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Restriction::Full => "full",
            Restriction::NoAlpha => "no-alpha",
            Restriction::NoBeta => "no-beta",
        })
    }
}

/// Squared norms of the pieces of one fitted step.
#[derive(Clone, Debug, PartialEq)]
pub struct TermNorms<T: Scalar> {
    /// Position `k` of the base point.
    pub index: usize,
    /// `‖V_k‖²`
    pub response: T,
    /// `‖Σ_ℓ A_ℓ Γ(V_{k−ℓ})‖²`
    pub autoregressive: T,
    /// `‖B Log_{S_k}(S*)‖²`
    pub reversion: T,
    /// `‖ε_k‖²`
    pub residual: T,
}

/// Maximum-likelihood fit of a scalar or diagonal model.
///
/// Parameters are ordered `(α_1..α_L, β, σ)` for the scalar model and
/// `(a_11..a_1m, …, a_L1..a_Lm, b_1..b_m, σ_1..σ_m)` for the diagonal one;
/// groups removed by the restriction are left out.
#[derive(Clone, Debug)]
pub struct FitResult<T: Scalar> {
    pub params: ModelParams<T>,
    pub restricted: Restriction,
    pub fisher: DMatrix<T>,
    pub std_errors: DVector<T>,
    pub log_lik: T,
    pub aic: T,
    /// NaN when the steps have no spread.
    pub r2: T,
    /// Number of regression rows, `n − 1 − L`.
    pub n_used: usize,
    /// Largest condition number among the Gram matrices solved.
    pub condition: T,
    /// Diagonal model: coordinates whose regression was rank deficient or
    /// whose response is identically zero. Their Fisher rows are zero and their
    /// standard errors NaN.
    pub degenerate: Vec<usize>,
    pub terms: Vec<TermNorms<T>>,
}

impl<T: Scalar> FitResult<T> {
    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    pub fn lag(&self) -> usize {
        self.params.lag()
    }

    pub fn geometry(&self) -> Geometry {
        self.params.geometry()
    }

    pub fn num_params(&self) -> usize {
        self.std_errors.len()
    }

    /// Free parameter values in Fisher order.
    pub fn estimates(&self) -> DVector<T> {
        let r = self.restricted;
        let mut out = Vec::new();
        match &self.params {
            ModelParams::Scalar(p) => {
                if r.has_alpha() {
                    out.extend_from_slice(&p.alpha);
                }
                if r.has_beta() {
                    out.push(p.beta);
                }
                out.push(p.sigma);
            }
            ModelParams::Diagonal(p) => {
                if r.has_alpha() {
                    for l in 0..p.a.nrows() {
                        out.extend(p.a.row(l).iter().copied());
                    }
                }
                if r.has_beta() {
                    out.extend(p.b.iter().copied());
                }
                out.extend(p.sigma.iter().copied());
            }
        }
        DVector::from_vec(out)
    }

    /// Labels matching [`FitResult::estimates`]; lags are one-based and
    /// coordinates zero-based.
    pub fn param_names(&self) -> Vec<String> {
        let r = self.restricted;
        let lag = self.lag();
        let mut out = Vec::new();
        match self.kind() {
            ModelKind::Scalar => {
                if r.has_alpha() {
                    out.extend((1..=lag).map(|l| format!("alpha{l}")));
                }
                if r.has_beta() {
                    out.push("beta".into());
                }
                out.push("sigma".into());
            }
            ModelKind::Diagonal => {
                let m = self.params.frame_dim();
                if r.has_alpha() {
                    for l in 1..=lag {
                        out.extend((0..m).map(|c| format!("a{l}[{c}]")));
                    }
                }
                if r.has_beta() {
                    out.extend((0..m).map(|c| format!("b[{c}]")));
                }
                out.extend((0..m).map(|c| format!("sigma[{c}]")));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Regressor {
    /// Zero-based lag slot, i.e. `ℓ − 1`.
    Lag(usize),
    Attractor,
}

fn regressors(lag: usize, r: Restriction) -> Vec<Regressor> {
    let mut cols = Vec::new();
    if r.has_alpha() {
        cols.extend((0..lag).map(Regressor::Lag));
    }
    if r.has_beta() {
        cols.push(Regressor::Attractor);
    }
    cols
}

fn column<T: Scalar>(row: &DatasetRow<T>, r: Regressor) -> &DVector<T> {
    match r {
        Regressor::Lag(l) => &row.lagged[l],
        Regressor::Attractor => &row.attractor,
    }
}

/// Gram matrix and right-hand side; `coord = None` pools all coordinates.
fn normal_equations<T: Scalar>(
    ds: &TangentDataset<T>,
    cols: &[Regressor],
    coord: Option<usize>,
) -> (DMatrix<T>, DVector<T>) {
    let c = cols.len();
    let mut g = DMatrix::zeros(c, c);
    let mut y = DVector::zeros(c);
    let dot = |a: &DVector<T>, b: &DVector<T>| match coord {
        Some(r) => a[r] * b[r],
        None => a.dot(b),
    };
    for row in &ds.rows {
        for i in 0..c {
            let xi = column(row, cols[i]);
            y[i] += dot(xi, &row.response);
            for j in 0..=i {
                g[(i, j)] += dot(xi, column(row, cols[j]));
            }
        }
    }
    for i in 0..c {
        for j in 0..i {
            g[(j, i)] = g[(i, j)];
        }
    }
    (g, y)
}

struct Solved<T: Scalar> {
    theta: DVector<T>,
    /// `G⁻¹`, or the pseudoinverse when `G` is badly conditioned.
    inverse: DMatrix<T>,
    condition: T,
    rank_deficient: bool,
}

fn solve_normal<T: Scalar>(g: &DMatrix<T>, y: &DVector<T>) -> Solved<T> {
    let c = g.nrows();
    if c == 0 {
        return Solved {
            theta: DVector::zeros(0),
            inverse: DMatrix::zeros(0, 0),
            condition: T::one(),
            rank_deficient: false,
        };
    }
    let eig = g.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if max <= T::zero() {
        return Solved {
            theta: DVector::zeros(c),
            inverse: DMatrix::zeros(c, c),
            condition: T::from_f64(f64::INFINITY).unwrap(),
            rank_deficient: true,
        };
    }
    let condition = if min > T::zero() {
        max / min
    } else {
        T::from_f64(f64::INFINITY).unwrap()
    };
    let tol = max * T::default_epsilon() * T::from_usize_lossy(c);
    if condition <= T::lit(CONDITION_LIMIT) {
        if let Some(ch) = Cholesky::new(g.clone()) {
            return Solved {
                theta: ch.solve(y),
                inverse: ch.inverse(),
                condition,
                rank_deficient: false,
            };
        }
    }
    let mut inverse = DMatrix::zeros(c, c);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > tol {
            let u = eig.eigenvectors.column(k);
            inverse += u * u.transpose() / l;
        }
    }
    Solved {
        theta: &inverse * y,
        inverse,
        condition,
        rank_deficient: min <= tol,
    }
}

fn check_rows<T: Scalar>(ds: &TangentDataset<T>) -> Result<()> {
    if ds.rows.len() < ds.lag + 2 {
        return Err(Error::InsufficientData {
            needed: ds.lag + 2,
            available: ds.rows.len(),
        });
    }
    Ok(())
}

fn gaussian_loglik<T: Scalar>(count: usize, sigma: T, rss: T) -> T {
    let nf = T::from_usize_lossy(count);
    if sigma == T::zero() {
        return T::from_f64(f64::INFINITY).unwrap();
    }
    -nf * T::lit(0.5) * T::two_pi().ln() - nf * sigma.ln() - rss / (T::lit(2.0) * sigma * sigma)
}

/// `2k − 2 log L`.
pub fn akaike<T: Scalar>(log_lik: T, num_params: usize) -> T {
    T::lit(2.0) * T::from_usize_lossy(num_params) - T::lit(2.0) * log_lik
}

/// Akaike information criterion of a fit, counting every free parameter including σ.
pub fn aic<T: Scalar>(fit: &FitResult<T>) -> T {
    akaike(fit.log_lik, fit.num_params())
}

fn term_norms<T: Scalar>(ds: &TangentDataset<T>, params: &ModelParams<T>) -> Vec<TermNorms<T>> {
    let zero = DVector::zeros(ds.dim);
    ds.rows
        .iter()
        .map(|row| {
            let ar = params.drift(&row.lagged, &zero);
            let rev = params.drift(&[], &row.attractor);
            let resid = &row.response - &ar - &rev;
            TermNorms {
                index: row.index,
                response: row.response.norm_squared(),
                autoregressive: ar.norm_squared(),
                reversion: rev.norm_squared(),
                residual: resid.norm_squared(),
            }
        })
        .collect()
}

/// `1 − Σ‖ε_k‖² / Σ‖v_k − v̄‖²` over the dataset rows, with `v̄` the mean of
/// all step vectors carried to a common frame.
pub fn dataset_r_squared<T: Scalar>(ds: &TangentDataset<T>, params: &ModelParams<T>) -> Result<T> {
    let count = T::from_usize_lossy(ds.step_coords.len());
    let mean = ds
        .step_coords
        .iter()
        .fold(DVector::zeros(ds.dim), |acc, v| acc + v)
        / count;
    let mut rss = T::zero();
    let mut tss = T::zero();
    for row in &ds.rows {
        let resid = &row.response - params.drift(&row.lagged, &row.attractor);
        rss += resid.norm_squared();
        tss += (&row.response - &mean).norm_squared();
    }
    if tss <= T::zero() {
        return Err(Error::ZeroVariance);
    }
    Ok(T::one() - rss / tss)
}

/// R² of `fit` on the series it was fitted to.
pub fn r_squared<T: Scalar>(points: &[SpdPoint<T>], fit: &FitResult<T>) -> Result<T> {
    let ds = build_dataset(fit.geometry(), points, fit.lag(), fit.params.attractor())?;
    dataset_r_squared(&ds, &fit.params)
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Scalar>(
    ds: &TangentDataset<T>,
    params: ModelParams<T>,
    restricted: Restriction,
    fisher: DMatrix<T>,
    std_errors: DVector<T>,
    log_lik: T,
    condition: T,
    degenerate: Vec<usize>,
) -> FitResult<T> {
    let r2 = dataset_r_squared(ds, &params).unwrap_or_else(|_| T::from_f64(f64::NAN).unwrap());
    let terms = term_norms(ds, &params);
    let aic = akaike(log_lik, std_errors.len());
    FitResult {
        params,
        restricted,
        fisher,
        std_errors,
        log_lik,
        aic,
        r2,
        n_used: ds.rows.len(),
        condition,
        degenerate,
        terms,
    }
}

/// Closed-form MLE of the scalar model `v_k = Σ α_ℓ v_{kℓ} + β v*_k + ε`,
/// `ε ~ N(0, σ² I_m)`.
pub fn fit_scalar<T: Scalar>(
    ds: &TangentDataset<T>,
    restricted: Restriction,
) -> Result<FitResult<T>> {
    check_rows(ds)?;
    let cols = regressors(ds.lag, restricted);
    let (g, y) = normal_equations(ds, &cols, None);
    let solved = solve_normal(&g, &y);
    if !cols.is_empty() && g.amax() == T::zero() {
        return Err(Error::SingularNormalEquations {
            coordinate: None,
            condition: f64::INFINITY,
        });
    }
    if solved.condition > T::lit(CONDITION_LIMIT) {
        warn!(
            "scalar normal equations have condition number {:.3e}; using pseudoinverse",
            solved.condition.to_f64_lossy()
        );
    }

    let mut alpha = vec![T::zero(); ds.lag];
    let mut beta = T::zero();
    for (c, &col) in cols.iter().enumerate() {
        match col {
            Regressor::Lag(l) => alpha[l] = solved.theta[c],
            Regressor::Attractor => beta = solved.theta[c],
        }
    }
    let attractor_point = ds.attractor_point.clone();
    let mut params = ScalarParams {
        alpha,
        beta,
        sigma: T::zero(),
        attractor: attractor_point,
        geometry: ds.geometry,
    };
    let rss = residual_sum(ds, &ModelParams::Scalar(params.clone()));
    let obs = ds.dim * ds.rows.len();
    let sigma = (rss / T::from_usize_lossy(obs)).sqrt();
    params.sigma = sigma;

    let fisher = scalar_fisher(&g, sigma, obs);
    let c = cols.len();
    let mut se = DVector::zeros(c + 1);
    for j in 0..c {
        se[j] = if solved.rank_deficient {
            T::from_f64(f64::NAN).unwrap()
        } else {
            (sigma * sigma * solved.inverse[(j, j)]).sqrt()
        };
    }
    se[c] = sigma / (T::lit(2.0) * T::from_usize_lossy(obs)).sqrt();
    let log_lik = gaussian_loglik(obs, sigma, rss);
    Ok(finish(
        ds,
        params.into(),
        restricted,
        fisher,
        se,
        log_lik,
        solved.condition,
        Vec::new(),
    ))
}

fn scalar_fisher<T: Scalar>(g: &DMatrix<T>, sigma: T, obs: usize) -> DMatrix<T> {
    let c = g.nrows();
    let s2 = sigma * sigma;
    let mut f = DMatrix::zeros(c + 1, c + 1);
    f.view_mut((0, 0), (c, c)).copy_from(&(g / s2));
    f[(c, c)] = T::lit(2.0) * T::from_usize_lossy(obs) / s2;
    f
}

fn residual_sum<T: Scalar>(ds: &TangentDataset<T>, params: &ModelParams<T>) -> T {
    ds.rows
        .iter()
        .map(|row| (&row.response - params.drift(&row.lagged, &row.attractor)).norm_squared())
        .fold(T::zero(), |a, b| a + b)
}

/// Closed-form MLE of the diagonal model: one `(L + 1)`-parameter regression
/// per frame coordinate, each with its own noise scale.
pub fn fit_diagonal<T: Scalar>(
    ds: &TangentDataset<T>,
    restricted: Restriction,
) -> Result<FitResult<T>> {
    check_rows(ds)?;
    let m = ds.dim;
    let n = ds.rows.len();
    let cols = regressors(ds.lag, restricted);
    let c = cols.len();
    let mut a = DMatrix::zeros(ds.lag, m);
    let mut b = DVector::zeros(m);
    let mut sigma = DVector::zeros(m);
    let mut grams = Vec::with_capacity(m);
    let mut degenerate = Vec::new();
    let mut worst = T::one();
    let mut worst_coord = 0;

    for r in 0..m {
        let (g, y) = normal_equations(ds, &cols, Some(r));
        let solved = solve_normal(&g, &y);
        let silent = ds.rows.iter().all(|row| row.response[r] == T::zero());
        if solved.rank_deficient || silent {
            degenerate.push(r);
        } else if solved.condition > T::lit(CONDITION_LIMIT) {
            warn!(
                "coordinate {r}: normal equations have condition number {:.3e}",
                solved.condition.to_f64_lossy()
            );
        }
        if solved.condition > worst {
            worst = solved.condition;
            worst_coord = r;
        }
        for (k, &col) in cols.iter().enumerate() {
            match col {
                Regressor::Lag(l) => a[(l, r)] = solved.theta[k],
                Regressor::Attractor => b[r] = solved.theta[k],
            }
        }
        grams.push((g, solved));
    }
    if m > 0 && degenerate.len() == m {
        return Err(Error::SingularNormalEquations {
            coordinate: Some(worst_coord),
            condition: worst.to_f64_lossy(),
        });
    }

    let params0 = DiagParams {
        a,
        b,
        sigma: sigma.clone(),
        attractor: ds.attractor_point.clone(),
        geometry: ds.geometry,
    };
    let model0 = ModelParams::Diagonal(params0.clone());
    let mut rss = DVector::zeros(m);
    for row in &ds.rows {
        let resid = &row.response - model0.drift(&row.lagged, &row.attractor);
        rss += resid.component_mul(&resid);
    }
    let nf = T::from_usize_lossy(n);
    for r in 0..m {
        sigma[r] = (rss[r] / nf).sqrt();
    }

    let j = c * m + m;
    let mut fisher = DMatrix::zeros(j, j);
    let mut se = DVector::zeros(j);
    let nan = T::from_f64(f64::NAN).unwrap();
    let mut log_lik = T::zero();
    for r in 0..m {
        let (g, solved) = &grams[r];
        let s2 = sigma[r] * sigma[r];
        let flagged = degenerate.contains(&r);
        for p in 0..c {
            se[p * m + r] = if flagged {
                nan
            } else {
                (s2 * solved.inverse[(p, p)]).sqrt()
            };
            if !flagged {
                for q in 0..c {
                    fisher[(p * m + r, q * m + r)] = g[(p, q)] / s2;
                }
            }
        }
        let si = c * m + r;
        if flagged {
            se[si] = nan;
        } else {
            fisher[(si, si)] = T::lit(2.0) * nf / s2;
            se[si] = sigma[r] / (T::lit(2.0) * nf).sqrt();
        }
        log_lik += gaussian_loglik(n, sigma[r], rss[r]);
    }
    let params = DiagParams { sigma, ..params0 };
    Ok(finish(
        ds,
        params.into(),
        restricted,
        fisher,
        se,
        log_lik,
        worst,
        degenerate,
    ))
}

/// Fits the requested model kind.
pub fn fit<T: Scalar>(
    ds: &TangentDataset<T>,
    kind: ModelKind,
    restricted: Restriction,
) -> Result<FitResult<T>> {
    match kind {
        ModelKind::Scalar => fit_scalar(ds, restricted),
        ModelKind::Diagonal => fit_diagonal(ds, restricted),
    }
}

/// Expected Fisher information of `fit` evaluated on `ds`, in the parameter
/// order of [`FitResult::estimates`].
pub fn fisher_information<T: Scalar>(
    fit: &FitResult<T>,
    ds: &TangentDataset<T>,
) -> Result<DMatrix<T>> {
    if ds.lag != fit.lag() || ds.dim != fit.params.frame_dim() {
        return Err(Error::DimensionMismatch {
            expected: fit.lag(),
            found: ds.lag,
        });
    }
    let cols = regressors(ds.lag, fit.restricted);
    match &fit.params {
        ModelParams::Scalar(p) => {
            let (g, _) = normal_equations(ds, &cols, None);
            Ok(scalar_fisher(&g, p.sigma, ds.dim * ds.rows.len()))
        }
        ModelParams::Diagonal(p) => {
            let m = ds.dim;
            let c = cols.len();
            let nf = T::from_usize_lossy(ds.rows.len());
            let mut f = DMatrix::zeros(c * m + m, c * m + m);
            for r in 0..m {
                if fit.degenerate.contains(&r) {
                    continue;
                }
                let (g, _) = normal_equations(ds, &cols, Some(r));
                let s2 = p.sigma[r] * p.sigma[r];
                for i in 0..c {
                    for j in 0..c {
                        f[(i * m + r, j * m + r)] = g[(i, j)] / s2;
                    }
                }
                f[(c * m + r, c * m + r)] = T::lit(2.0) * nf / s2;
            }
            Ok(f)
        }
    }
}

/// `z` for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

/// `Φ̂_j ± z·sqrt((I⁻¹)_jj)` with `z = 1.96`.
pub fn confidence_intervals<T: Scalar>(fit: &FitResult<T>) -> Result<Vec<(T, T)>> {
    confidence_intervals_z(fit, T::lit(Z_95))
}

/// Intervals at an arbitrary normal quantile `z`. Parameters of degenerate
/// coordinates get NaN bounds; any other non-finite standard error is an error.
pub fn confidence_intervals_z<T: Scalar>(fit: &FitResult<T>, z: T) -> Result<Vec<(T, T)>> {
    let est = fit.estimates();
    if fit.degenerate.is_empty() && fit.std_errors.iter().any(|s| !s.is_finite()) {
        return Err(Error::SingularFisher);
    }
    Ok(est
        .iter()
        .zip(fit.std_errors.iter())
        .map(|(&e, &s)| (e - z * s, e + z * s))
        .collect())
}

/// Builds the dataset and fits in one call.
pub fn fit_series<T: Scalar>(
    g: Geometry,
    points: &[SpdPoint<T>],
    attractor: &SpdPoint<T>,
    lag: usize,
    kind: ModelKind,
    restricted: Restriction,
) -> Result<FitResult<T>> {
    let ds = build_dataset(g, points, lag, attractor)?;
    fit(&ds, kind, restricted)
}
