//! Balanced k-class datasets with orthonormal class features `e_i` plus
//! isotropic Gaussian noise, and the half-normal weight initialization.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{dot, norm, Matrix};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    /// Number of classes.
    pub k: usize,
    /// Total sample count; must be divisible by `k`.
    pub n_total: usize,
    /// Ambient dimension; must be at least `k`.
    pub dim: usize,
    /// Noise level: each noise coordinate is drawn from `N(0, sigma^2 / dim)`.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be >= 2, got {}", self.k)));
        }
        if self.n_total == 0 || !self.n_total.is_multiple_of(self.k) {
            return Err(Error::Config(format!(
                "n_total ({}) must be a positive multiple of k ({})",
                self.n_total, self.k
            )));
        }
        if self.dim < self.k {
            return Err(Error::Config(format!(
                "dim ({}) must be >= k ({}) so class features are distinct basis vectors",
                self.dim, self.k
            )));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::Config(format!(
                "noise_sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    pub fn per_class(&self) -> usize {
        self.n_total / self.k
    }
}

/// One training point `x = e_label + noise`. Labels are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: usize,
    pub features: Vec<f64>,
    pub noise: Vec<f64>,
}

impl Sample {
    pub fn from_noise(label: usize, noise: Vec<f64>) -> Self {
        let mut features = noise.clone();
        features[label] += 1.0;
        Self {
            label,
            features,
            noise,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    config: DatasetConfig,
    samples: Vec<Sample>,
}

impl Dataset {
    /// Assembles a dataset from explicit samples, checking grouping, balance and
    /// the `features == e_label + noise` reconstruction up to rounding.
    pub fn from_samples(config: DatasetConfig, samples: Vec<Sample>) -> Result<Self> {
        config.validate()?;
        ensure_len("dataset samples", config.n_total, samples.len())?;
        let per_class = config.per_class();
        for (idx, s) in samples.iter().enumerate() {
            let expected_label = idx / per_class;
            if s.label != expected_label {
                return Err(Error::Config(format!(
                    "sample {idx} has label {} but class groups must be contiguous and ordered (expected {expected_label})",
                    s.label
                )));
            }
            ensure_len("sample features", config.dim, s.features.len())?;
            ensure_len("sample noise", config.dim, s.noise.len())?;
            for (j, (&f, &n)) in s.features.iter().zip(&s.noise).enumerate() {
                let basis = if j == s.label { 1.0 } else { 0.0 };
                if (f - n - basis).abs() > 4.0 * f64::EPSILON * (1.0 + n.abs()) {
                    return Err(Error::Config(format!(
                        "sample {idx}: features - noise differs from e_label at coordinate {j}"
                    )));
                }
            }
        }
        Ok(Self { config, samples })
    }

    pub fn config(&self) -> &DatasetConfig {
        &self.config
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples of class `c` (the group `S_c`).
    pub fn class(&self, c: usize) -> &[Sample] {
        let m = self.config.per_class();
        &self.samples[c * m..(c + 1) * m]
    }

    /// Features as an `N x d` matrix in sample order.
    pub fn feature_matrix(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.len() * self.dim());
        for s in &self.samples {
            data.extend_from_slice(&s.features);
        }
        Matrix::from_vec(self.len(), self.dim(), data).expect("consistent dataset shape")
    }
}

/// Draws the dataset: class groups in order `0..k`, each with `N/k` samples,
/// noise i.i.d. `N(0, sigma^2/d)` per coordinate from the dataset stream.
pub fn generate_dataset(cfg: &DatasetConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = rng::stream(cfg.seed, Stream::Dataset);
    let std = cfg.noise_sigma / libm::sqrt(cfg.dim as f64);
    let mut samples = Vec::with_capacity(cfg.n_total);
    for label in 0..cfg.k {
        for _ in 0..cfg.per_class() {
            let noise: Vec<f64> = if std == 0.0 {
                vec![0.0; cfg.dim]
            } else {
                (0..cfg.dim)
                    .map(|_| {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        std * g
                    })
                    .collect()
            };
            samples.push(Sample::from_noise(label, noise));
        }
    }
    Ok(Dataset {
        config: *cfg,
        samples,
    })
}

/// `k x d` matrix of `|N(0, delta^2)|` entries. Entries are strictly positive
/// (an exact zero draw is redrawn).
pub fn init_weights(k: usize, d: usize, delta: f64, seed: u64) -> Result<Matrix> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Config(format!(
            "init scale delta must be finite and > 0, got {delta}"
        )));
    }
    let normal = Normal::new(0.0, delta).map_err(|_| Error::Config("bad init scale".into()))?;
    let mut rng = rng::stream(seed, Stream::HomoWeights);
    let mut data = Vec::with_capacity(k * d);
    while data.len() < k * d {
        let v: f64 = normal.sample(&mut rng);
        if v != 0.0 {
            data.push(v.abs());
        }
    }
    Matrix::from_vec(k, d, data)
}

/// Raw initialization statistics. No thresholds are applied here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitReport {
    pub delta: f64,
    /// Min and max over the `k x k` block `W_{j,j'}`, `j, j' < k`.
    pub entry_min: f64,
    pub entry_max: f64,
    /// Sorted pairwise `|W_jj - W_j'j'|`.
    pub diag_gaps: Vec<f64>,
    pub noise_norm_max: f64,
    pub max_pair_corr: f64,
    pub max_basis_corr: f64,
    pub max_row_corr: f64,
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
}

pub fn verify_init(w0: &Matrix, ds: &Dataset, delta: f64) -> Result<InitReport> {
    let k = ds.k();
    ensure_len("init weight rows", k, w0.rows())?;
    ensure_len("init weight cols", ds.dim(), w0.cols())?;

    let mut entry_min = f64::INFINITY;
    let mut entry_max = f64::NEG_INFINITY;
    for j in 0..k {
        for jp in 0..k {
            entry_min = entry_min.min(w0[(j, jp)]);
            entry_max = entry_max.max(w0[(j, jp)]);
        }
    }

    let mut diag_gaps = Vec::with_capacity(k * (k - 1) / 2);
    for j in 0..k {
        for jp in j + 1..k {
            diag_gaps.push((w0[(j, j)] - w0[(jp, jp)]).abs());
        }
    }
    diag_gaps.sort_by(f64::total_cmp);

    let noise_norm_max = ds.samples().iter().map(|s| norm(&s.noise)).fold(0.0, f64::max);

    // Zero noise vectors contribute correlation 0.
    let units: Vec<Option<Vec<f64>>> = ds.samples().iter().map(|s| unit(&s.noise)).collect();
    let rows: Vec<Option<Vec<f64>>> = (0..k).map(|j| unit(w0.row(j))).collect();

    let mut max_pair_corr: f64 = 0.0;
    for a in 0..units.len() {
        let Some(ua) = &units[a] else { continue };
        for ub in units[a + 1..].iter().flatten() {
            max_pair_corr = max_pair_corr.max(dot(ua, ub).abs());
        }
    }

    let mut max_basis_corr: f64 = 0.0;
    let mut max_row_corr: f64 = 0.0;
    for u in units.iter().flatten() {
        for v in &u[..k] {
            max_basis_corr = max_basis_corr.max(v.abs());
        }
        for r in rows.iter().flatten() {
            max_row_corr = max_row_corr.max(dot(u, r).abs());
        }
    }

    Ok(InitReport {
        delta,
        entry_min,
        entry_max,
        diag_gaps,
        noise_norm_max,
        max_pair_corr,
        max_basis_corr,
        max_row_corr,
    })
}
