//! Text and JSON artifact formats. Every writer has a matching reader and
//! floats are written with 17 significant digits, so round trips are exact.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{LabError, Result};

mod dataset;
mod json;
mod snapshot;
mod tables;

pub use dataset::{dataset_hash, read_dataset, write_dataset, DATASET_MAGIC};
pub use json::{BoundsFile, DynamicsFile, EventsFile, InductionSummary, ReportFile};
pub use snapshot::{read_snapshot, write_homo, write_mlp, ModelSnapshot};
pub use tables::{
    read_curve, read_descent, read_mlp_trajectory, read_table, read_trajectory, write_curve, write_descent,
    write_mlp_trajectory, write_table, write_trajectory, Meta, Table,
};

/// `{:.16e}`: 17 significant digits, enough to recover any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn join_f64(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ")
}

/// Line reader that skips blank lines and `#` comments, collecting
/// `# key=value` comments as metadata.
pub(crate) struct Lines<'a> {
    source: &'a str,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    pub meta: BTreeMap<String, String>,
    pub comments: Vec<String>,
}

impl<'a> Lines<'a> {
    pub fn new(source: &'a str, text: &'a str) -> Self {
        Self {
            source,
            inner: text.lines().enumerate(),
            meta: BTreeMap::new(),
            comments: Vec::new(),
        }
    }

    pub fn err(&self, line: usize, msg: impl Into<String>) -> LabError {
        LabError::parse(self.source, line, msg)
    }

    fn next_opt(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                let c = c.trim();
                if let Some((k, v)) = c.split_once('=') {
                    self.meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                self.comments.push(c.to_string());
                continue;
            }
            return Some((i + 1, line));
        }
        None
    }

    pub fn next(&mut self) -> Result<(usize, &'a str)> {
        self.next_opt()
            .ok_or_else(|| LabError::parse(self.source, 0, "unexpected end of file"))
    }

    pub fn expect_end(&mut self) -> Result<()> {
        match self.next_opt() {
            None => Ok(()),
            Some((n, _)) => Err(self.err(n, "unexpected trailing data")),
        }
    }

    pub fn parse<T: FromStr>(&self, line: usize, what: &str, tok: &str) -> Result<T> {
        tok.parse()
            .map_err(|_| self.err(line, format!("cannot parse {what} from {tok:?}")))
    }

    /// Parses exactly `n` whitespace-separated floats.
    pub fn floats(&self, line: usize, s: &str, n: usize) -> Result<Vec<f64>> {
        let v: Vec<f64> = s
            .split_whitespace()
            .map(|t| self.parse(line, "number", t))
            .collect::<Result<_>>()?;
        if v.len() != n {
            return Err(self.err(line, format!("expected {n} values, found {}", v.len())));
        }
        Ok(v)
    }
}
