use anyhow::Context;
use spdflow::inference::mahalanobis_compare;
use spdflow::io;
use spdflow::ModelKind;

use crate::commands::{ensure_dir, label, out_dir};
use crate::config::{check_file, ConfigError, ConfigFile};
use crate::CompareArgs;

const KEYS: &[&str] = &["fits", "out"];

pub fn run(a: CompareArgs) -> anyhow::Result<()> {
    let cfg = ConfigFile::load(a.config.as_deref())?;
    cfg.check_keys(KEYS)?;
    let paths = cfg.merge_paths(a.fits, "fits");
    if paths.len() < 2 {
        return Err(ConfigError(format!(
            "fits: at least two fit files are needed, got {}",
            paths.len()
        ))
        .into());
    }
    for p in &paths {
        check_file(p, "fits")?;
    }
    let out = out_dir(cfg.merge_path(a.out, "out"));

    let fits = paths
        .iter()
        .map(|p| {
            let f = io::read_fit(p).with_context(|| format!("reading {}", p.display()))?;
            if f.kind() != ModelKind::Scalar {
                anyhow::bail!("{} is not a scalar fit", p.display());
            }
            Ok(f)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let cmp = mahalanobis_compare(&fits)?;
    let labels: Vec<String> = paths.iter().map(|p| label(p)).collect();

    ensure_dir(&out)?;
    let mut header = vec!["fit"];
    header.extend(labels.iter().map(String::as_str));
    let n = labels.len();
    let rows = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), (0..n).map(|j| cmp.distances[(i, j)]).collect()));
    io::write_labelled_table(&out.join("distances.csv"), &header, rows)?;
    let rows = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), cmp.mds.coords.row(i).iter().copied().collect()));
    io::write_labelled_table(&out.join("mds.csv"), &["fit", "coord1", "coord2"], rows)?;
    println!(
        "compared {n} fits; MDS keeps {:.4} of the positive spectrum",
        cmp.mds.proportion
    );
    Ok(())
}
