mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use spdflow::geometry::{Geometry, SpdPoint};
use spdflow::inference::*;
use spdflow::model::{build_dataset, ModelKind, ModelParams};
use spdflow::Error;

const AI: Geometry = Geometry::AffineInvariant;

#[test]
fn noise_free_reversion_is_recovered_exactly() {
    let params = scalar_params(&[], 0.5, 0.0, 3, AI);
    let series = run(&params, 40, 1);
    let ds = build_dataset(AI, series.points(), 0, params.attractor()).unwrap();
    let fit = fit_scalar(&ds, Restriction::Full).unwrap();
    let ModelParams::Scalar(p) = &fit.params else {
        panic!()
    };
    assert!((p.beta - 0.5).abs() < 1e-10, "{}", p.beta);
    assert!(p.sigma < 1e-10);
    assert!((fit.r2 - 1.0).abs() < 1e-8);
}

#[test]
fn scalar_fit_matches_stacked_least_squares() {
    for (lag, seed) in [(0, 3), (1, 4), (2, 5)] {
        let alpha = vec![-0.2; lag];
        let params = scalar_params(&alpha, 0.3, 0.1, 3, AI);
        let series = run(&params, 200, seed);
        let star = params.attractor();
        let ds = build_dataset(AI, series.points(), lag, star).unwrap();
        let rows = oracle_rows(AI, series.points(), lag, star);
        for (r, a, b) in [
            (Restriction::Full, true, true),
            (Restriction::NoAlpha, false, true),
            (Restriction::NoBeta, true, false),
        ] {
            if !a && !b || (!b && lag == 0) {
                continue;
            }
            let fit = fit_scalar(&ds, r).unwrap();
            let (theta, sigma) = stacked_scalar(&rows, a, b);
            let est = fit.estimates();
            assert_eq!(est.len(), theta.len() + 1);
            for j in 0..theta.len() {
                assert!(
                    (est[j] - theta[j]).abs() < 1e-8,
                    "lag {lag} {r}: {est} vs {theta}"
                );
            }
            assert!((est[theta.len()] - sigma).abs() < 1e-10);
        }
    }
}

#[test]
fn diagonal_fit_matches_per_coordinate_regressions() {
    let params = scalar_params(&[0.3], 0.4, 0.1, 2, AI);
    let series = run(&params, 300, 11);
    let star = params.attractor();
    let ds = build_dataset(AI, series.points(), 1, star).unwrap();
    let fit = fit_diagonal(&ds, Restriction::Full).unwrap();
    let (coef, sigma) = per_coordinate(&oracle_rows(AI, series.points(), 1, star));
    let est = fit.estimates();
    let m = 3;
    for r in 0..m {
        assert!((est[r] - coef[(0, r)]).abs() < 1e-8);
        assert!((est[m + r] - coef[(1, r)]).abs() < 1e-8);
        assert!((est[2 * m + r] - sigma[r]).abs() < 1e-10);
    }
    assert_eq!(fit.param_names()[m], "b[0]");
}

#[test]
fn euclidean_fit_is_a_flat_var_on_matrix_differences() {
    let g = Geometry::Euclidean;
    let params = scalar_params(&[0.2, -0.1], 0.3, 0.02, 3, g);
    let series = run(&params, 150, 8);
    let star = params.attractor();
    let fit = fit_series(
        g,
        series.points(),
        star,
        2,
        ModelKind::Scalar,
        Restriction::Full,
    )
    .unwrap();

    let mats: Vec<DMatrix<f64>> = series
        .points()
        .iter()
        .map(|s| s.matrix().as_matrix().clone())
        .collect();
    let vec_of = |m: &DMatrix<f64>| DVector::from_column_slice(m.as_slice());
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for k in 2..mats.len() - 1 {
        let cols = [
            vec_of(&(&mats[k] - &mats[k - 1])),
            vec_of(&(&mats[k - 1] - &mats[k - 2])),
            vec_of(&(star.matrix().as_matrix() - &mats[k])),
        ];
        let resp = vec_of(&(&mats[k + 1] - &mats[k]));
        for i in 0..9 {
            x.extend(cols.iter().map(|c| c[i]));
            y.push(resp[i]);
        }
    }
    let x = DMatrix::from_row_slice(y.len(), 3, &x);
    let theta = x
        .svd(true, true)
        .solve(&DVector::from_vec(y), 1e-14)
        .unwrap();
    let est = fit.estimates();
    for j in 0..3 {
        assert!((est[j] - theta[j]).abs() < 1e-8);
    }
}

#[test]
fn fisher_has_closed_form_sigma_entry_and_zero_cross_terms() {
    let params = scalar_params(&[-0.3], 0.2, 0.05, 3, AI);
    let series = run(&params, 120, 2);
    let ds = build_dataset(AI, series.points(), 1, params.attractor()).unwrap();
    let fit = fit_scalar(&ds, Restriction::Full).unwrap();
    let s = fit.estimates()[2];
    let f = &fit.fisher;
    assert_eq!(f[(2, 2)], 2.0 * (6 * fit.n_used) as f64 / (s * s));
    assert_eq!(f[(0, 2)], 0.0);
    assert_eq!(f[(2, 1)], 0.0);
    assert_eq!(f, &f.transpose());
    assert_eq!(fisher_information(&fit, &ds).unwrap(), *f);
    let inv = f.clone().try_inverse().unwrap();
    for j in 0..3 {
        assert!(
            (fit.std_errors[j] - inv[(j, j)].sqrt()).abs() < 1e-12 * fit.std_errors[j].max(1.0)
        );
    }

    let dfit = fit_diagonal(&ds, Restriction::Full).unwrap();
    let m = 6;
    for i in 0..2 * m {
        for j in 2 * m..3 * m {
            assert_eq!(dfit.fisher[(i, j)], 0.0);
        }
    }
    assert_eq!(fisher_information(&dfit, &ds).unwrap(), dfit.fisher);
}

#[test]
fn fisher_matches_numerical_hessian() {
    let params = scalar_params(&[-0.3], 0.2, 0.05, 2, AI);
    let series = run(&params, 60, 21);
    let star = params.attractor();
    let ds = build_dataset(AI, series.points(), 1, star).unwrap();
    let fit = fit_scalar(&ds, Restriction::Full).unwrap();
    let rows = oracle_rows(AI, series.points(), 1, star);
    let phi: Vec<f64> = fit.estimates().iter().copied().collect();
    let ll = |x: &[f64]| scalar_loglik(&rows, &x[..2], x[2]);
    let h = 1e-4;
    for i in 0..3 {
        for j in 0..3 {
            let at = |di: f64, dj: f64| {
                let mut x = phi.clone();
                x[i] += di * h * phi[i].abs().max(0.1);
                x[j] += dj * h * phi[j].abs().max(0.1);
                ll(&x)
            };
            let (hi, hj) = (h * phi[i].abs().max(0.1), h * phi[j].abs().max(0.1));
            let d2 =
                (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * hi * hj);
            let expected = fit.fisher[(i, j)];
            let scale = fit.fisher[(i, i)].abs().max(fit.fisher[(j, j)].abs());
            assert!(
                (-d2 - expected).abs() <= 1e-4 * scale,
                "({i},{j}): {} vs {expected}",
                -d2
            );
        }
    }
}

#[test]
fn mle_beats_perturbed_parameters() {
    let params = scalar_params(&[0.2], 0.3, 0.1, 2, AI);
    let series = run(&params, 100, 5);
    let star = params.attractor();
    let ds = build_dataset(AI, series.points(), 1, star).unwrap();
    let fit = fit_scalar(&ds, Restriction::Full).unwrap();
    let rows = oracle_rows(AI, series.points(), 1, star);
    let phi = fit.estimates();
    let best = scalar_loglik(&rows, &[phi[0], phi[1]], phi[2]);
    assert!((best - fit.log_lik).abs() < 1e-8 * best.abs());
    let mut r = rng(0);
    for _ in 0..50 {
        let d = random_sym(2, 0.01, &mut r);
        let e = d.row_major();
        assert!(
            scalar_loglik(
                &rows,
                &[phi[0] + e[0], phi[1] + e[1]],
                (phi[2] + e[3]).abs()
            ) <= best
        );
    }
}

#[test]
fn intervals_are_symmetric_and_aic_counts_parameters() {
    let params = scalar_params(&[0.2], 0.3, 0.1, 2, AI);
    let series = run(&params, 100, 6);
    let ds = build_dataset(AI, series.points(), 1, params.attractor()).unwrap();
    let fit = fit_scalar(&ds, Restriction::Full).unwrap();
    for ((lo, hi), e) in confidence_intervals(&fit)
        .unwrap()
        .into_iter()
        .zip(fit.estimates().iter())
    {
        assert!(((hi - e) - (e - lo)).abs() <= 4.0 * f64::EPSILON * (e.abs() + hi - lo));
    }
    assert_eq!(aic(&fit), fit.aic);
    assert_eq!(akaike(fit.log_lik, 4) - akaike(fit.log_lik, 3), 2.0);
    assert_eq!(
        fit_scalar(&ds, Restriction::NoAlpha).unwrap().num_params(),
        2
    );
    assert_eq!(
        fit_scalar(&ds, Restriction::NoBeta).unwrap().num_params(),
        2
    );
    assert_eq!(
        fit_diagonal(&ds, Restriction::Full).unwrap().num_params(),
        9
    );
}

#[test]
fn silent_coordinate_is_flagged_in_diagonal_fit() {
    // steps confined to the (0,0) and (1,1) coordinates of diagonal matrices
    let g = Geometry::Euclidean;
    let mut r = rng(4);
    let pts: Vec<SpdPoint<f64>> = (0..60)
        .map(|_| {
            use rand::Rng;
            SpdPoint::from_diagonal(&[1.0 + r.random::<f64>(), 1.0 + r.random::<f64>()]).unwrap()
        })
        .collect();
    let star = SpdPoint::from_diagonal(&[1.5, 1.5]).unwrap();
    let ds = build_dataset(g, &pts, 1, &star).unwrap();
    let fit = fit_diagonal(&ds, Restriction::Full).unwrap();
    assert_eq!(fit.degenerate, vec![1]);
    let est = fit.estimates();
    assert_eq!(est[1], 0.0);
    assert_eq!(est[4], 0.0);
    assert!(fit.std_errors[1].is_nan());
    assert!(fit.std_errors[0].is_finite() && fit.std_errors[2].is_finite());
    let ci = confidence_intervals(&fit).unwrap();
    assert!(ci[0].0.is_finite() && ci[1].0.is_nan());

    let flat = vec![star.clone(); 10];
    let ds = build_dataset(g, &flat, 1, &star).unwrap();
    assert!(matches!(
        fit_scalar(&ds, Restriction::Full),
        Err(Error::SingularNormalEquations { .. })
    ));
    assert!(matches!(
        fit_diagonal(&ds, Restriction::Full),
        Err(Error::SingularNormalEquations { .. })
    ));
}

#[test]
fn r_squared_null_model_on_noise_is_near_zero() {
    let params = scalar_params(&[0.0], 0.0, 0.1, 2, AI);
    let series = run(&params, 1500, 12);
    let star = params.attractor();
    let ds = build_dataset(AI, series.points(), 1, star).unwrap();
    let zero = scalar_params(&[0.0], 0.0, 0.1, 2, AI);
    let r2 = dataset_r_squared(&ds, &zero).unwrap();
    assert!(r2.abs() < 0.1 && r2 <= 1.0, "{r2}");
    let fit = fit_scalar(&ds, Restriction::Full).unwrap();
    assert!((r_squared(series.points(), &fit).unwrap() - fit.r2).abs() < 1e-12);
    assert!(fit.r2 <= 1.0);
}

#[test]
fn select_lag_on_white_noise_is_zero() {
    let params = scalar_params(&[], 0.0, 0.1, 2, AI);
    let mut zeros = 0;
    for seed in 0..10 {
        let series = run(&params, 300, 100 + seed);
        let sel = select_lag(AI, series.points(), params.attractor(), 1).unwrap();
        assert_eq!(sel.trace.len(), 1);
        zeros += usize::from(sel.lag == 0);
    }
    assert!(zeros >= 8);
    let series = run(&params, 5, 0);
    assert!(matches!(
        select_lag(AI, series.points(), params.attractor(), 2),
        Err(Error::InsufficientData { .. })
    ));
}

#[test]
fn mahalanobis_distances() {
    let params = scalar_params(&[0.2], 0.3, 0.1, 2, AI);
    let fits: Vec<_> = (0..4)
        .map(|s| {
            let series = run(&params, 150, 40 + s);
            fit_series(
                AI,
                series.points(),
                params.attractor(),
                1,
                ModelKind::Scalar,
                Restriction::Full,
            )
            .unwrap()
        })
        .collect();
    let same = mahalanobis_compare(&[fits[0].clone(), fits[0].clone()]).unwrap();
    assert_eq!(same.distances[(0, 1)], 0.0);
    let cmp = mahalanobis_compare(&fits).unwrap();
    for i in 0..4 {
        assert_eq!(cmp.distances[(i, i)], 0.0);
        for j in 0..4 {
            assert!((cmp.distances[(i, j)] - cmp.distances[(j, i)]).abs() < 1e-12);
        }
    }
    assert_eq!(cmp.mds.coords.shape(), (4, 2));

    let series = run(&params, 150, 1);
    let other = fit_series(
        AI,
        series.points(),
        params.attractor(),
        2,
        ModelKind::Scalar,
        Restriction::Full,
    )
    .unwrap();
    assert!(matches!(
        mahalanobis_compare(&[fits[0].clone(), other]),
        Err(Error::MixedLag { .. })
    ));
    assert!(matches!(
        mahalanobis_compare(&fits[..1]),
        Err(Error::InsufficientData { .. })
    ));
}
