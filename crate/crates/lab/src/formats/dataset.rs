use std::fmt::Write as _;

use plateau_core::{Dataset, DatasetConfig, Sample};
use sha2::{Digest, Sha256};

use super::{fmt_f64, join_f64, Lines};
use crate::error::Result;

/// First line of every dataset file.
pub const DATASET_MAGIC: &str = "# plateau-dataset v1";

/// Header `k N d sigma seed`, then `label v1..vd n1..nd` per sample with
/// one-based labels.
pub fn write_dataset(ds: &Dataset) -> String {
    let c = ds.config();
    let mut out = String::new();
    writeln!(out, "{DATASET_MAGIC}").unwrap();
    writeln!(
        out,
        "{} {} {} {} {}",
        c.k,
        c.n_total,
        c.dim,
        fmt_f64(c.noise_sigma),
        c.seed
    )
    .unwrap();
    for s in ds.samples() {
        writeln!(
            out,
            "{} {} {}",
            s.label + 1,
            join_f64(&s.features),
            join_f64(&s.noise)
        )
        .unwrap();
    }
    out
}

pub fn read_dataset(source: &str, text: &str) -> Result<Dataset> {
    if text.lines().next().map(str::trim) != Some(DATASET_MAGIC) {
        return Err(super::LabError::parse(
            source,
            1,
            format!("missing format line {DATASET_MAGIC:?}"),
        ));
    }
    let mut lines = Lines::new(source, text);
    let (n, header) = lines.next()?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 5 {
        return Err(lines.err(n, "header must be `k N d sigma seed`"));
    }
    let cfg = DatasetConfig {
        k: lines.parse(n, "k", tok[0])?,
        n_total: lines.parse(n, "N", tok[1])?,
        dim: lines.parse(n, "d", tok[2])?,
        noise_sigma: lines.parse(n, "sigma", tok[3])?,
        seed: lines.parse(n, "seed", tok[4])?,
    };
    cfg.validate()?;
    let d = cfg.dim;
    let mut samples = Vec::with_capacity(cfg.n_total);
    for _ in 0..cfg.n_total {
        let (n, line) = lines.next()?;
        let (label, rest) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| lines.err(n, "empty sample line"))?;
        let label: usize = lines.parse(n, "label", label)?;
        if label == 0 || label > cfg.k {
            return Err(lines.err(n, format!("label {label} outside 1..={}", cfg.k)));
        }
        let v = lines.floats(n, rest, 2 * d)?;
        samples.push(Sample {
            label: label - 1,
            features: v[..d].to_vec(),
            noise: v[d..].to_vec(),
        });
    }
    lines.expect_end()?;
    Ok(Dataset::from_samples(cfg, samples)?)
}

/// SHA-256 of the canonical text form, lowercase hex.
pub fn dataset_hash(ds: &Dataset) -> String {
    let digest = Sha256::digest(write_dataset(ds).as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}
