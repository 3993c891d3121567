use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use spdflow::inference::{confidence_intervals, fit, select_lag, LagSelection};
use spdflow::io;
use spdflow::model::build_dataset;
use spdflow::pipeline::pair_attractor;
use spdflow::stats::frechet_mean_default;
use spdflow::{CovSeries, FitResult, Geometry, ModelKind, Restriction, SpdPoint};

use crate::commands::{ensure_dir, label, out_dir, AttractorPolicy};
use crate::config::{check_file, ConfigError, ConfigFile};
use crate::FitArgs;

const KEYS: &[&str] = &[
    "series",
    "geometry",
    "lag",
    "lag_max",
    "model",
    "restrict",
    "attractor",
    "attractor_file",
    "interictal",
    "out",
];

enum LagChoice {
    Fixed(usize),
    Select(usize),
}

struct Plan {
    series: Vec<PathBuf>,
    geometry: Geometry,
    lag: LagChoice,
    model: ModelKind,
    restrict: Restriction,
    attractor: AttractorPolicy,
    attractor_file: Option<PathBuf>,
    interictal: Option<PathBuf>,
    out: PathBuf,
}

fn settle(a: FitArgs) -> Result<Plan, ConfigError> {
    let cfg = ConfigFile::load(a.config.as_deref())?;
    cfg.check_keys(KEYS)?;
    let series = cfg.merge_paths(a.series, "series");
    if series.is_empty() {
        return Err(ConfigError(
            "missing required setting 'series' (flag --series or config key series)".into(),
        ));
    }
    for s in &series {
        check_file(s, "series")?;
    }
    let geometry = cfg
        .merge(a.geometry, "geometry")?
        .unwrap_or(Geometry::AffineInvariant);
    let lag = match (cfg.merge(a.lag, "lag")?, cfg.merge(a.lag_max, "lag_max")?) {
        (Some(_), Some(_)) => {
            return Err(ConfigError("lag and lag_max are mutually exclusive".into()))
        }
        (_, Some(0)) => return Err(ConfigError("lag_max: must be at least 1".into())),
        (_, Some(m)) => LagChoice::Select(m),
        (Some(l), None) => LagChoice::Fixed(l),
        (None, None) => LagChoice::Fixed(1),
    };
    let interictal = cfg.merge_path(a.interictal, "interictal");
    let attractor_file = cfg.merge_path(a.attractor_file, "attractor_file");
    let attractor = cfg
        .merge(a.attractor, "attractor")?
        .unwrap_or(if interictal.is_some() {
            AttractorPolicy::InterictalMean
        } else {
            AttractorPolicy::OwnMean
        });
    match attractor {
        AttractorPolicy::InterictalMean => {
            let p = interictal.as_ref().ok_or_else(|| {
                ConfigError("attractor = interictal-mean needs 'interictal'".into())
            })?;
            check_file(p, "interictal")?;
        }
        AttractorPolicy::File => {
            let p = attractor_file
                .as_ref()
                .ok_or_else(|| ConfigError("attractor = file needs 'attractor_file'".into()))?;
            check_file(p, "attractor_file")?;
        }
        AttractorPolicy::OwnMean => {}
    }
    Ok(Plan {
        series,
        geometry,
        lag,
        model: cfg.merge(a.model, "model")?.unwrap_or(ModelKind::Scalar),
        restrict: cfg.merge(a.restrict, "restrict")?.unwrap_or_default(),
        attractor,
        attractor_file,
        interictal,
        out: out_dir(cfg.merge_path(a.out, "out")),
    })
}

enum Attractor {
    Fixed(SpdPoint),
    Interictal(CovSeries),
    Own,
}

fn write_outputs(
    dir: &Path,
    fit_: &FitResult,
    others: &[FitResult],
    sel: Option<&LagSelection<f64>>,
) -> anyhow::Result<()> {
    ensure_dir(dir)?;
    io::write_fit(&dir.join("fit.json"), fit_)?;

    let names = fit_.param_names();
    let est = fit_.estimates();
    let ci = confidence_intervals(fit_).unwrap_or_else(|_| vec![(f64::NAN, f64::NAN); names.len()]);
    let rows = names.iter().enumerate().map(|(j, n)| {
        (
            n.as_str(),
            vec![est[j], fit_.std_errors[j], ci[j].0, ci[j].1],
        )
    });
    io::write_labelled_table(
        &dir.join("ci.csv"),
        &["parameter", "estimate", "std_error", "lower", "upper"],
        rows,
    )?;

    let terms = fit_.terms.iter().map(|t| {
        [
            t.index as f64,
            t.response,
            t.autoregressive,
            t.reversion,
            t.residual,
        ]
    });
    io::write_table(
        &dir.join("terms.csv"),
        &[
            "index",
            "response",
            "autoregressive",
            "reversion",
            "residual",
        ],
        terms,
    )?;

    let labels: Vec<String> = others.iter().map(|f| f.restricted.to_string()).collect();
    let rows = others.iter().zip(&labels).map(|(f, l)| {
        (
            l.as_str(),
            vec![f.num_params() as f64, f.log_lik, f.aic, f.r2],
        )
    });
    io::write_labelled_table(
        &dir.join("aic.csv"),
        &["restriction", "k", "log_lik", "aic", "r2"],
        rows,
    )?;

    if let Some(sel) = sel {
        let rows = sel.trace.iter().map(|s| {
            [
                s.lag as f64,
                s.alpha,
                s.std_error,
                s.lower,
                s.upper,
                f64::from(u8::from(s.significant)),
                s.aic,
                s.r2,
            ]
        });
        io::write_table(
            &dir.join("lag_trace.csv"),
            &[
                "lag",
                "alpha",
                "std_error",
                "lower",
                "upper",
                "significant",
                "aic",
                "r2",
            ],
            rows,
        )?;
    }
    Ok(())
}

fn fit_one(plan: &Plan, attractor: &Attractor, path: &Path, dir: &Path) -> anyhow::Result<String> {
    let series = io::read_series(path).with_context(|| format!("reading {}", path.display()))?;
    let g = plan.geometry;
    let star = match attractor {
        Attractor::Fixed(s) => s.clone(),
        Attractor::Interictal(i) => pair_attractor(&series, i, g)?,
        Attractor::Own => frechet_mean_default(g, series.points())?.mean,
    };
    let (lag, sel) = match plan.lag {
        LagChoice::Fixed(l) => (l, None),
        LagChoice::Select(m) => {
            let sel = select_lag(g, series.points(), &star, m)?;
            (sel.lag, Some(sel))
        }
    };
    let ds = build_dataset(g, series.points(), lag, &star)?;
    let main = fit(&ds, plan.model, plan.restrict)?;
    let others = [Restriction::Full, Restriction::NoAlpha, Restriction::NoBeta]
        .into_iter()
        .filter(|r| lag > 0 || r.has_beta())
        .map(|r| fit(&ds, plan.model, r))
        .collect::<spdflow::Result<Vec<_>>>()?;
    write_outputs(dir, &main, &others, sel.as_ref())?;
    Ok(format!(
        "{}: L={} n_used={} log_lik={:.6} aic={:.6} r2={:.6}",
        label(path),
        lag,
        main.n_used,
        main.log_lik,
        main.aic,
        main.r2
    ))
}

pub fn run(a: FitArgs) -> anyhow::Result<()> {
    let plan = settle(a)?;
    let attractor = match plan.attractor {
        AttractorPolicy::File => {
            let p = plan.attractor_file.as_ref().expect("validated");
            Attractor::Fixed(io::read_point(p).with_context(|| format!("reading {}", p.display()))?)
        }
        AttractorPolicy::InterictalMean => {
            let p = plan.interictal.as_ref().expect("validated");
            Attractor::Interictal(
                io::read_series(p).with_context(|| format!("reading {}", p.display()))?,
            )
        }
        AttractorPolicy::OwnMean => Attractor::Own,
    };
    let dirs: Vec<PathBuf> = if plan.series.len() == 1 {
        vec![plan.out.clone()]
    } else {
        let labels: Vec<String> = plan.series.iter().map(|p| label(p)).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                anyhow::bail!(ConfigError(format!(
                    "series: two inputs share the output name '{l}'"
                )));
            }
        }
        labels.iter().map(|l| plan.out.join(l)).collect()
    };
    let results: Vec<anyhow::Result<String>> = plan
        .series
        .par_iter()
        .zip(dirs.par_iter())
        .map(|(path, dir)| {
            fit_one(&plan, &attractor, path, dir)
                .with_context(|| format!("fitting {}", path.display()))
        })
        .collect();
    let mut failed = None;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                eprintln!("error: {e:#}");
                failed.get_or_insert(e);
            }
        }
    }
    failed.map_or(Ok(()), Err)
}
