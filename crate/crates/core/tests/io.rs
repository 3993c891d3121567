mod common;

use common::*;
use nalgebra::DMatrix;
use spdflow::geometry::Geometry;
use spdflow::inference::{fit_series, Restriction};
use spdflow::io::*;
use spdflow::model::ModelKind;
use spdflow::pipeline::{plan_greedy_mineig, SignalMatrix};

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("spdflow-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn series_and_params_round_trip() {
    let params = scalar_params(&[0.1, -0.2], 0.3, 0.05, 3, Geometry::AffineInvariant);
    let mut series = run(&params, 20, 4);
    series.meta.seed = Some(4);
    let path = tmp("series.json");
    write_series(&path, &series).unwrap();
    let back = read_series(&path).unwrap();
    assert_eq!(back.meta, series.meta);
    for (a, b) in back.points().iter().zip(series.points()) {
        assert_eq!(a.matrix().row_major(), b.matrix().row_major());
    }

    let path = tmp("params.json");
    write_params(&path, &params).unwrap();
    let back = read_params(&path).unwrap();
    assert_eq!(format!("{back:?}"), format!("{params:?}"));
}

#[test]
fn fit_round_trip_keeps_non_finite_values() {
    let params = scalar_params(&[0.2], 0.3, 0.05, 2, Geometry::AffineInvariant);
    let series = run(&params, 60, 2);
    let mut fit = fit_series(
        Geometry::AffineInvariant,
        series.points(),
        params.attractor(),
        1,
        ModelKind::Diagonal,
        Restriction::NoBeta,
    )
    .unwrap();
    fit.r2 = f64::NAN;
    fit.log_lik = f64::INFINITY;
    let path = tmp("fit.json");
    write_fit(&path, &fit).unwrap();
    let back = read_fit(&path).unwrap();
    assert!(back.r2.is_nan());
    assert_eq!(back.log_lik, f64::INFINITY);
    assert_eq!(back.fisher, fit.fisher);
    assert_eq!(back.estimates(), fit.estimates());
    assert_eq!(back.restricted, Restriction::NoBeta);
    assert_eq!(back.terms, fit.terms);
}

#[test]
fn signals_and_plans_round_trip() {
    let z = DMatrix::from_fn(40, 3, |i, j| ((i * 7 + j * 3) % 11) as f64 * 0.37 - 1.0);
    let signal =
        SignalMatrix::with_channels(z, 20.0, vec!["Fz".into(), "Cz".into(), "Pz".into()]).unwrap();
    let csv = tmp("sig.csv");
    write_signal_csv(&csv, &signal).unwrap();
    assert_eq!(read_signal(&csv, Some(20.0)).unwrap(), signal);
    assert!(read_signal(&csv, None).is_err());
    let bin = tmp("sig.bin");
    write_signal_bin(&bin, &signal).unwrap();
    assert_eq!(read_signal(&bin, None).unwrap(), signal);

    let raw = spdflow::pipeline::window_covariances(&signal, 1.0).unwrap();
    let plan = plan_greedy_mineig(&raw, 2).unwrap();
    let path = tmp("plan.json");
    write_plan(&path, &plan).unwrap();
    assert_eq!(read_plan(&path).unwrap(), plan);

    let path = tmp("table.csv");
    write_table(&path, &["a", "b"], [[0.1, 1e-300], [f64::MAX, -2.5]]).unwrap();
    let (h, m) = read_table(&path).unwrap();
    assert_eq!(h, vec!["a", "b"]);
    assert_eq!(
        m,
        DMatrix::from_row_slice(2, 2, &[0.1, 1e-300, f64::MAX, -2.5])
    );
}
