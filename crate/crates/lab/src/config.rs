//! Flat `key = value` configuration merged with command-line overrides.
//!
//! Precedence, lowest first: built-in defaults, the config file, flags.
//! Keys are normalized so `total-time` and `total_time` are the same key.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{LabError, Result};

pub fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_kv(source: &str, text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| LabError::parse(source, i + 1, "expected `key = value`"))?;
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(LabError::parse(source, i + 1, "empty key"));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(LabError::parse(source, i + 1, format!("duplicate key {key}")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn new(file: BTreeMap<String, String>, flags: BTreeMap<String, String>) -> Self {
        let mut values = file;
        values.extend(flags);
        Self { values }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            values: pairs
                .into_iter()
                .map(|(k, v)| (normalize_key(k), v.to_string()))
                .collect(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize_key(key), value.into());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Rejects keys the command does not understand.
    pub fn check_known(&self, command: &str, known: &[&str]) -> Result<()> {
        for k in self.values.keys() {
            if !known.contains(&k.as_str()) {
                return Err(LabError::Config(format!("unknown key `{k}` for {command}")));
            }
        }
        Ok(())
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| LabError::Config(format!("cannot parse `{key}` from {v:?}"))),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.opt(key)?
            .ok_or_else(|| LabError::Config(format!("missing required key `{key}`")))
    }

    pub fn path(&self, key: &str) -> Result<PathBuf> {
        self.require::<String>(key).map(PathBuf::from)
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str, default: &str) -> Result<Vec<T>> {
        let v = self.raw(key).unwrap_or(default);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| LabError::Config(format!("cannot parse `{key}` entry {s:?}")))
            })
            .collect()
    }
}
