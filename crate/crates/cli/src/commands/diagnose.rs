use anyhow::Context;
use serde::Serialize;
use spdflow::io::{self, MatrixFile};
use spdflow::stats::{
    classical_mds, direction_cosines, frechet_mean_default, pairwise_distances, tangent_pca,
};
use spdflow::{Error, Geometry};

use crate::commands::{ensure_dir, out_dir};
use crate::config::{check_file, require, ConfigError, ConfigFile};
use crate::DiagnoseArgs;

const KEYS: &[&str] = &["series", "geometry", "components", "out"];

#[derive(Serialize)]
struct FrechetFile {
    mean: MatrixFile,
    variance: f64,
    iterations: usize,
    gradient_norm: f64,
}

/// Which diagnostics could not be computed meaningfully.
#[derive(Serialize)]
struct Summary {
    points: usize,
    geometry: Geometry,
    degenerate: Vec<String>,
}

pub fn run(a: DiagnoseArgs) -> anyhow::Result<()> {
    let cfg = ConfigFile::load(a.config.as_deref())?;
    cfg.check_keys(KEYS)?;
    let path = require(cfg.merge_path(a.series, "series"), "series")?;
    check_file(&path, "series")?;
    let g = cfg
        .merge(a.geometry, "geometry")?
        .unwrap_or(Geometry::AffineInvariant);
    let d: usize = cfg.merge(a.components, "components")?.unwrap_or(2);
    if d == 0 {
        return Err(ConfigError("components: must be at least 1".into()).into());
    }
    let out = out_dir(cfg.merge_path(a.out, "out"));

    let series = io::read_series(&path).with_context(|| format!("reading {}", path.display()))?;
    let pts = series.points();
    let m = spdflow::geometry::frame_dim(series.dim());
    if d > m {
        return Err(
            ConfigError(format!("components: at most {m} for p = {}", series.dim())).into(),
        );
    }
    let mut degenerate = Vec::new();
    ensure_dir(&out)?;

    let cosines = match direction_cosines(g, pts) {
        Ok(c) => c,
        Err(Error::ZeroTangent { index }) => {
            degenerate.push(format!("cosines: step {index} has zero length"));
            vec![f64::NAN; pts.len().saturating_sub(2)]
        }
        Err(e) => return Err(e.into()),
    };
    let rows = cosines
        .iter()
        .enumerate()
        .map(|(k, c)| [(k + 1) as f64, *c]);
    io::write_table(&out.join("cosines.csv"), &["index", "cosine"], rows)?;

    let pca = tangent_pca(g, pts, d)?;
    if pca.eigenvalues.iter().all(|&l| l <= 0.0) {
        degenerate.push("pca: steps have no spread".into());
    }
    let mut header = vec!["index".to_owned()];
    header.extend((1..=d).map(|j| format!("pc{j}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = pca.scores.row_iter().enumerate().map(|(i, r)| {
        let mut v = vec![i as f64];
        v.extend(r.iter().copied());
        v
    });
    io::write_table(&out.join("pca.csv"), &header, rows)?;
    let rows = pca
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, l)| [(i + 1) as f64, *l]);
    io::write_table(
        &out.join("pca_eigenvalues.csv"),
        &["component", "eigenvalue"],
        rows,
    )?;

    let fm = frechet_mean_default(g, pts)?;
    if fm.variance <= (100.0 * f64::EPSILON).powi(2) {
        degenerate.push("frechet: zero variance".into());
    }
    let file = FrechetFile {
        mean: MatrixFile::from_sym(fm.mean.matrix()),
        variance: fm.variance,
        iterations: fm.iterations,
        gradient_norm: fm.final_gradient_norm,
    };
    io::write_json(&out.join("frechet.json"), &file)?;

    let dist = pairwise_distances(g, pts)?;
    let n = pts.len();
    let header: Vec<String> = std::iter::once("index".to_owned())
        .chain((0..n).map(|j| j.to_string()))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..n).map(|i| {
        std::iter::once(i as f64)
            .chain(dist.row(i).iter().copied())
            .collect::<Vec<_>>()
    });
    io::write_table(&out.join("distances.csv"), &header, rows)?;
    let mds = classical_mds(&dist, 2.min(n))?;
    if dist.amax() <= 100.0 * f64::EPSILON {
        degenerate.push("mds: all points coincide".into());
    }
    let rows = mds.coords.row_iter().enumerate().map(|(i, r)| {
        let mut v = vec![i as f64];
        v.extend(r.iter().copied());
        v
    });
    io::write_table(
        &out.join("mds.csv"),
        &["index", "coord1", "coord2"][..=2.min(n)],
        rows,
    )?;

    io::write_json(
        &out.join("summary.json"),
        &Summary {
            points: n,
            geometry: g,
            degenerate: degenerate.clone(),
        },
    )?;
    println!("diagnosed {n} points; Fréchet variance {:.6e}", fm.variance);
    for d in &degenerate {
        println!("degenerate: {d}");
    }
    Ok(())
}
