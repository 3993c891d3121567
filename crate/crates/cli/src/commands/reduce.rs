use anyhow::{bail, Context};
use spdflow::io;
use spdflow::pipeline::{
    apply_reduction, plan_greedy_mineig, plan_variance_max, window_covariances,
};
use spdflow::{ReductionKind, ReductionPlan, SymMatrix};

use crate::commands::{ensure_dir, out_dir};
use crate::config::{check_file, require, ConfigError, ConfigFile};
use crate::ReduceArgs;

const KEYS: &[&str] = &[
    "signal",
    "interictal_signal",
    "rate",
    "window",
    "p",
    "reduction",
    "plan",
    "out",
];

fn reduce(
    plan: &ReductionPlan,
    raw: &[SymMatrix],
    window: f64,
) -> anyhow::Result<spdflow::CovSeries> {
    match apply_reduction(plan, raw) {
        Ok(mut s) => {
            s.dt = window;
            Ok(s)
        }
        Err(first) => {
            let bad: Vec<String> = (0..raw.len())
                .filter(|&i| apply_reduction(plan, &raw[i..=i]).is_err())
                .map(|i| i.to_string())
                .collect();
            Err(anyhow::Error::from(first).context(format!(
                "reduced covariance is not positive definite in windows [{}]",
                bad.join(", ")
            )))
        }
    }
}

pub fn run(a: ReduceArgs) -> anyhow::Result<()> {
    let cfg = ConfigFile::load(a.config.as_deref())?;
    cfg.check_keys(KEYS)?;
    let signal = require(cfg.merge_path(a.signal, "signal"), "signal")?;
    check_file(&signal, "signal")?;
    let interictal = cfg.merge_path(a.interictal_signal, "interictal_signal");
    if let Some(path) = &interictal {
        check_file(path, "interictal_signal")?;
    }
    let rate: Option<f64> = cfg.merge(a.rate, "rate")?;
    if rate.is_some_and(|r| !(r.is_finite() && r > 0.0)) {
        return Err(ConfigError("rate: must be positive".into()).into());
    }
    let window: f64 = cfg.merge(a.window, "window")?.unwrap_or(1.0);
    if !(window.is_finite() && window > 0.0) {
        return Err(ConfigError(format!("window: must be positive, got {window}")).into());
    }
    let plan_path = cfg.merge_path(a.plan, "plan");
    let p: Option<usize> = cfg.merge(a.p, "p")?;
    if plan_path.is_none() && p.is_none() {
        return Err(
            ConfigError("missing required setting 'p' (flag --p or config key p)".into()).into(),
        );
    }
    if p == Some(0) {
        return Err(ConfigError("p: must be at least 1".into()).into());
    }
    if let Some(path) = &plan_path {
        check_file(path, "plan")?;
    }
    let kind = cfg
        .merge(a.reduction, "reduction")?
        .unwrap_or(ReductionKind::VarianceMax);
    let out = out_dir(cfg.merge_path(a.out, "out"));

    let z =
        io::read_signal(&signal, rate).with_context(|| format!("reading {}", signal.display()))?;
    if let Some(p) = p {
        if p > z.num_channels() {
            bail!(
                "dimension error: cannot reduce {} channels to p = {p}",
                z.num_channels()
            );
        }
    }
    let raw = window_covariances(&z, window)?;
    let plan = match &plan_path {
        Some(path) => io::read_plan(path).with_context(|| format!("reading {}", path.display()))?,
        None => match kind {
            ReductionKind::VarianceMax => plan_variance_max(&raw, p.expect("checked"))?,
            ReductionKind::GreedyMinEig => plan_greedy_mineig(&raw, p.expect("checked"))?,
        },
    };
    let mut series = reduce(&plan, &raw, window)?;
    series.meta.source = signal.file_name().map(|s| s.to_string_lossy().into_owned());
    series.meta.sampling_rate = Some(z.rate);

    ensure_dir(&out)?;
    io::write_plan(&out.join("plan.json"), &plan)?;
    io::write_series(&out.join("series.json"), &series)?;
    if let Some(path) = &interictal {
        let zi =
            io::read_signal(path, rate).with_context(|| format!("reading {}", path.display()))?;
        let raw_i = window_covariances(&zi, window)?;
        let mut s = reduce(&plan, &raw_i, window).context("interictal signal")?;
        s.meta.source = path.file_name().map(|s| s.to_string_lossy().into_owned());
        s.meta.sampling_rate = Some(zi.rate);
        io::write_series(&out.join("interictal.json"), &s)?;
    }

    println!(
        "windows: {}  channels: {}  p: {}  reduction: {}",
        raw.len(),
        plan.q(),
        plan.p(),
        plan.kind
    );
    if plan.kind == ReductionKind::VarianceMax && plan_path.is_none() {
        let rows: Vec<[f64; 2]> = (1..=plan.q())
            .map(|k| Ok([k as f64, plan_variance_max(&raw, k)?.retained]))
            .collect::<spdflow::Result<_>>()?;
        println!("p\tretained");
        for [k, r] in &rows {
            println!("{k}\t{r:.6}");
        }
        io::write_table(&out.join("retained.csv"), &["p", "retained"], &rows)?;
    } else {
        println!("retained: {:.6}", plan.retained);
    }
    Ok(())
}
