//! Optional `key=value` run configuration. Command-line flags take
//! precedence over file values; keys may use `-` or `_`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lscd::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    source: Option<PathBuf>,
}

fn key(k: &str) -> String {
    k.trim().replace('-', "_")
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format { line: i + 1, message: format!("expected key=value, got `{line}`") })?;
            values.insert(key(k), v.trim().to_string());
        }
        Ok(Self { values, source: None })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Precondition(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| lscd::tsv::with_path(e, path))?;
        cfg.source = Some(path.to_path_buf());
        Ok(cfg)
    }

    fn raw(&self, k: &str) -> Option<&str> {
        self.values.get(&key(k)).map(String::as_str)
    }

    /// The flag value if given, else the parsed config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, k: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(k)
            .map(|v| {
                v.parse::<T>().map_err(|_| {
                    let from = self.source.as_ref().map(|p| format!(" in {}", p.display())).unwrap_or_default();
                    Error::Precondition(format!("bad value `{v}` for `{k}`{from}"))
                })
            })
            .transpose()
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, k: &str, default: T) -> Result<T> {
        Ok(self.pick(flag, k)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, k: &str) -> Result<T> {
        self.pick(flag, k)?
            .ok_or_else(|| Error::Precondition(format!("missing --{} (or `{}` in the config file)", k.replace('_', "-"), key(k))))
    }

    /// Repeated flag values, else a comma-separated config list.
    pub fn list(&self, flag: &[String], k: &str) -> Vec<String> {
        if !flag.is_empty() {
            return flag.to_vec();
        }
        self.raw(k)
            .map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default()
    }
}
