use anyhow::Context;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spdflow::io::{self, FitFile, ParamsFile};
use spdflow::model::simulate;
use spdflow::ModelParams;

use crate::commands::ensure_dir;
use crate::config::{check_file, require, ConfigError, ConfigFile};
use crate::SimulateArgs;

const KEYS: &[&str] = &["params", "n", "seed", "init", "out"];

/// Accepts a parameter file or a fit file.
fn load_params(path: &std::path::Path) -> anyhow::Result<ModelParams> {
    let value: serde_json::Value = io::read_json(path)?;
    let params = if value.get("params").is_some() {
        serde_json::from_value::<FitFile>(value)?
            .params
            .to_params()?
    } else {
        serde_json::from_value::<ParamsFile>(value)?.to_params()?
    };
    Ok(params)
}

pub fn run(a: SimulateArgs) -> anyhow::Result<()> {
    let cfg = ConfigFile::load(a.config.as_deref())?;
    cfg.check_keys(KEYS)?;
    let params_path = require(cfg.merge_path(a.params, "params"), "params")?;
    check_file(&params_path, "params")?;
    let n: usize = require(cfg.merge(a.n, "n")?, "n")?;
    let seed: u64 = cfg.merge(a.seed, "seed")?.unwrap_or(0);
    let init_path = cfg.merge_path(a.init, "init");
    if let Some(p) = &init_path {
        check_file(p, "init")?;
    }
    let out = require(cfg.merge_path(a.out, "out"), "out")?;

    let params =
        load_params(&params_path).with_context(|| format!("reading {}", params_path.display()))?;
    let lag = params.lag();
    if n < lag + 1 {
        return Err(ConfigError(format!("n: must be at least L + 1 = {}", lag + 1)).into());
    }
    let init = match &init_path {
        Some(p) => {
            let s = io::read_series(p).with_context(|| format!("reading {}", p.display()))?;
            if s.len() < lag + 1 {
                anyhow::bail!(
                    "{} has {} points; L + 1 = {} are needed",
                    p.display(),
                    s.len(),
                    lag + 1
                );
            }
            s.points()[..=lag].to_vec()
        }
        None => vec![params.attractor().clone(); lag + 1],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut series = simulate(&params, &init, n, &mut rng)?;
    series.meta.seed = Some(seed);
    series.meta.source = Some("simulate".into());
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    io::write_series(&out, &series)?;
    println!("wrote {} points to {}", series.len(), out.display());
    if !series.meta.not_pd_steps.is_empty() {
        println!(
            "warning: {} points left the positive definite cone",
            series.meta.not_pd_steps.len()
        );
    }
    Ok(())
}
