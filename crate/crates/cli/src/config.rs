//! Plain-text `key = value` configuration files and their merge with flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::UsageError;

/// Keys a configuration file may set. They match the long flag names.
pub const KEYS: &[&str] = &[
    "c",
    "char",
    "depth",
    "dump",
    "exact-rational",
    "format",
    "grid",
    "h-law",
    "lambda-samples",
    "leaf-law",
    "out",
    "random",
    "seed",
    "suite",
    "sweep",
    "timings",
    "tol",
    "trees",
    "workers",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("config line {}: expected key=value", n + 1)))?;
            let k = k.trim().trim_start_matches("--").replace('_', "-");
            if !KEYS.contains(&k.as_str()) {
                return Err(UsageError(format!("config line {}: unknown key '{k}'", n + 1)));
            }
            entries.insert(k, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// The flag value if given, else the file value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, UsageError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| UsageError(format!("config key '{key}': {e}")))
            })
            .transpose()
    }

    pub fn pick_list<T: FromStr>(&self, flag: Vec<T>, key: &str) -> Result<Vec<T>, UsageError>
    where
        T::Err: std::fmt::Display,
    {
        if !flag.is_empty() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(Vec::new()),
            Some(s) => s
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| {
                    p.parse::<T>()
                        .map_err(|e| UsageError(format!("config key '{key}': {e}")))
                })
                .collect(),
        }
    }

    pub fn pick_flag(&self, flag: bool, key: &str) -> Result<bool, UsageError> {
        if flag {
            return Ok(true);
        }
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(other) => Err(UsageError(format!(
                "config key '{key}': expected a boolean, got '{other}'"
            ))),
        }
    }
}

/// Hex SHA-256 of the canonical JSON form of a resolved configuration.
pub fn config_hash<T: serde::Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serialises");
    hex::encode(Sha256::digest(&bytes))
}
