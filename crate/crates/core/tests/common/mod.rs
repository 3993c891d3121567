#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdflow::geometry::{Geometry, SpdPoint, SymMatrix};
use spdflow::model::{simulate, CovSeries, DiagParams, ModelParams, ScalarParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `A Aᵀ + shift·I` with standard normal `A`.
pub fn random_spd(p: usize, shift: f64, rng: &mut impl Rng) -> SpdPoint<f64> {
    let a = DMatrix::from_fn(p, p, |_, _| {
        rng.sample::<f64, _>(rand_distr::StandardNormal)
    });
    let m = &a * a.transpose() / p as f64 + DMatrix::identity(p, p) * shift;
    SpdPoint::new(SymMatrix::new(m).unwrap()).unwrap()
}

pub fn random_sym(p: usize, scale: f64, rng: &mut impl Rng) -> SymMatrix<f64> {
    let a = DMatrix::from_fn(p, p, |_, _| {
        rng.sample::<f64, _>(rand_distr::StandardNormal) * scale
    });
    SymMatrix::new((&a + a.transpose()) * 0.5).unwrap()
}

pub fn attractor(p: usize) -> SpdPoint<f64> {
    let m = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0 + 0.5 * i as f64
        } else {
            0.2 / (1.0 + (i + j) as f64)
        }
    });
    SpdPoint::new(SymMatrix::new(m).unwrap()).unwrap()
}

pub fn scalar_params(
    alpha: &[f64],
    beta: f64,
    sigma: f64,
    p: usize,
    g: Geometry,
) -> ModelParams<f64> {
    ScalarParams {
        alpha: alpha.to_vec(),
        beta,
        sigma,
        attractor: attractor(p),
        geometry: g,
    }
    .into()
}

pub fn diag_params(
    a: DMatrix<f64>,
    b: DVector<f64>,
    sigma: DVector<f64>,
    p: usize,
    g: Geometry,
) -> ModelParams<f64> {
    DiagParams {
        a,
        b,
        sigma,
        attractor: attractor(p),
        geometry: g,
    }
    .into()
}

/// Simulates `n` points started from `L + 1` copies of a point near the attractor.
pub fn run(params: &ModelParams<f64>, n: usize, seed: u64) -> CovSeries<f64> {
    let p = params.attractor().dim();
    let start = SpdPoint::from_diagonal(&vec![1.5; p]).unwrap();
    let init = vec![start; params.lag() + 1];
    simulate(params, &init, n, &mut rng(seed)).unwrap()
}

/// Regression rows rebuilt from the geometry primitives alone.
pub struct Rows {
    pub response: Vec<DVector<f64>>,
    pub lagged: Vec<Vec<DVector<f64>>>,
    pub attractor: Vec<DVector<f64>>,
}

pub fn oracle_rows(g: Geometry, pts: &[SpdPoint<f64>], lag: usize, star: &SpdPoint<f64>) -> Rows {
    let step = |i: usize| g.log_map(&pts[i], &pts[i + 1]).unwrap();
    let mut rows = Rows {
        response: vec![],
        lagged: vec![],
        attractor: vec![],
    };
    for k in lag..pts.len() - 1 {
        let base = &pts[k];
        rows.response.push(g.to_coords(base, &step(k)).unwrap());
        rows.lagged.push(
            (1..=lag)
                .map(|l| {
                    let moved = g
                        .parallel_transport(&pts[k - l], base, &step(k - l))
                        .unwrap();
                    g.to_coords(base, &moved).unwrap()
                })
                .collect(),
        );
        rows.attractor
            .push(g.to_coords(base, &g.log_map(base, star).unwrap()).unwrap());
    }
    rows
}

/// Stacks every scalar observation into one least-squares problem and solves
/// it with the SVD pseudoinverse. Returns `(coefficients, σ̂)`.
pub fn stacked_scalar(rows: &Rows, alpha: bool, beta: bool) -> (DVector<f64>, f64) {
    let n = rows.response.len();
    let m = rows.response[0].len();
    let lag = rows.lagged[0].len();
    let c = if alpha { lag } else { 0 } + usize::from(beta);
    let mut x = DMatrix::zeros(n * m, c);
    let mut y = DVector::zeros(n * m);
    for k in 0..n {
        for r in 0..m {
            let i = k * m + r;
            y[i] = rows.response[k][r];
            let mut col = 0;
            if alpha {
                for l in 0..lag {
                    x[(i, col)] = rows.lagged[k][l][r];
                    col += 1;
                }
            }
            if beta {
                x[(i, col)] = rows.attractor[k][r];
            }
        }
    }
    let theta = x.clone().svd(true, true).solve(&y, 1e-14).unwrap();
    let rss = (&y - &x * &theta).norm_squared();
    (theta, (rss / (n * m) as f64).sqrt())
}

/// One regression per coordinate. Returns `(L+1) × m` coefficients (lags then
/// attractor) and the per-coordinate `σ̂`.
pub fn per_coordinate(rows: &Rows) -> (DMatrix<f64>, DVector<f64>) {
    let n = rows.response.len();
    let m = rows.response[0].len();
    let lag = rows.lagged[0].len();
    let mut coef = DMatrix::zeros(lag + 1, m);
    let mut sigma = DVector::zeros(m);
    for r in 0..m {
        let x = DMatrix::from_fn(n, lag + 1, |k, j| {
            if j < lag {
                rows.lagged[k][j][r]
            } else {
                rows.attractor[k][r]
            }
        });
        let y = DVector::from_fn(n, |k, _| rows.response[k][r]);
        let theta = x.clone().svd(true, true).solve(&y, 1e-14).unwrap();
        sigma[r] = ((&y - &x * &theta).norm_squared() / n as f64).sqrt();
        coef.set_column(r, &theta);
    }
    (coef, sigma)
}

/// Gaussian log-likelihood of the stacked scalar model at `(θ, σ)`.
pub fn scalar_loglik(rows: &Rows, theta: &[f64], sigma: f64) -> f64 {
    let lag = rows.lagged[0].len();
    let m = rows.response[0].len();
    let mut rss = 0.0;
    for k in 0..rows.response.len() {
        let mut fitted = &rows.attractor[k] * theta[lag];
        for (x, &a) in rows.lagged[k].iter().zip(theta) {
            fitted += x * a;
        }
        rss += (&rows.response[k] - fitted).norm_squared();
    }
    let obs = (m * rows.response.len()) as f64;
    -0.5 * obs * (2.0 * std::f64::consts::PI).ln() - obs * sigma.ln() - rss / (2.0 * sigma * sigma)
}
