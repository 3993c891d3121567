//! Flat `key = value` run configuration. Command-line flags override file values.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Invalid or missing setting; reported before any computation starts.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

fn normalise(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    source: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> ConfigResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, Some(path.to_path_buf()))
    }

    pub fn parse(text: &str, source: Option<PathBuf>) -> ConfigResult<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected 'key = value'", n + 1)))?;
            let key = normalise(k);
            if values.insert(key.clone(), v.trim().to_owned()).is_some() {
                return Err(ConfigError(format!(
                    "line {}: duplicate key '{key}'",
                    n + 1
                )));
            }
        }
        Ok(Self { values, source })
    }

    /// Rejects keys the current subcommand does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> ConfigResult<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(ConfigError(format!(
                    "unknown key '{key}' (allowed: {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get<T>(&self, key: &str) -> ConfigResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|raw| {
                raw.parse::<T>()
                    .map_err(|e| ConfigError(format!("{key}: invalid value '{raw}': {e}")))
            })
            .transpose()
    }

    /// Paths are resolved relative to the config file.
    pub fn get_paths(&self, key: &str) -> Vec<PathBuf> {
        let Some(raw) = self.values.get(key) else {
            return Vec::new();
        };
        let base = self.source.as_deref().and_then(Path::parent);
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match base {
                Some(b) if Path::new(s).is_relative() => b.join(s),
                _ => PathBuf::from(s),
            })
            .collect()
    }

    /// The flag value if given, otherwise the config value.
    pub fn merge<T>(&self, cli: Option<T>, key: &str) -> ConfigResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn merge_path(&self, cli: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        cli.or_else(|| self.get_paths(key).into_iter().next())
    }

    pub fn merge_paths(&self, cli: Vec<PathBuf>, key: &str) -> Vec<PathBuf> {
        if cli.is_empty() {
            self.get_paths(key)
        } else {
            cli
        }
    }
}

pub fn require<T>(v: Option<T>, key: &str) -> ConfigResult<T> {
    v.ok_or_else(|| {
        ConfigError(format!(
            "missing required setting '{key}' (flag --{} or config key {key})",
            key.replace('_', "-")
        ))
    })
}

pub fn check_file(path: &Path, key: &str) -> ConfigResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(ConfigError(format!(
            "{key}: file {} does not exist",
            path.display()
        )))
    }
}
