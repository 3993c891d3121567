use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;

pub mod compare;
pub mod diagnose;
pub mod fit;
pub mod reduce;
pub mod simulate;

/// Where the attractor `S*` of a fit comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttractorPolicy {
    /// Fréchet mean of a separate interictal series.
    InterictalMean,
    /// Fréchet mean of the fitted series itself.
    OwnMean,
    /// A matrix stored in a file.
    File,
}

impl FromStr for AttractorPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "interictal-mean" | "interictal" => Ok(AttractorPolicy::InterictalMean),
            "own-mean" | "own" => Ok(AttractorPolicy::OwnMean),
            "file" => Ok(AttractorPolicy::File),
            other => Err(format!(
                "unknown attractor policy '{other}' (interictal-mean, own-mean, file)"
            )),
        }
    }
}

pub(crate) fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

/// A short name for an input file: its stem, or the parent directory name
/// when the stem is generic.
pub(crate) fn label(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if matches!(stem.as_str(), "fit" | "series") {
        if let Some(parent) = path.parent().and_then(Path::file_name) {
            return parent.to_string_lossy().into_owned();
        }
    }
    stem
}

pub(crate) fn out_dir(out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| PathBuf::from("."))
}
