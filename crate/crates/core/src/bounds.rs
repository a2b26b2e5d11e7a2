//! Trained-model statistics, closed-form plateau and monotonicity boundaries,
//! and claim checks against measured interpolation curves.
//!
//! Unspecified big-O factors in the homogeneous-model boundaries are realized
//! with one `slack` multiplier: `O(sqrt(delta)) = slack * sqrt(delta)` and
//! `O(delta) = slack * delta`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::E;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::homonet::HomoNet;
use crate::interpolate::Curve;
use crate::linalg::powi;
use crate::mlpnet::{BiasMode, MlpNet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassGap {
    pub class: usize,
    /// `b_top - b_class`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedStats {
    pub delta: f64,
    /// Homogeneity degree or network depth.
    pub r: u32,
    /// Trained biases in descending order.
    pub bias_sorted: Vec<f64>,
    pub top: usize,
    /// One entry per non-top class.
    pub gaps: Vec<ClassGap>,
    pub delta_min: f64,
    pub delta_max: f64,
    /// Trained diagonal weights (homogeneous model only).
    pub w_diag: Vec<f64>,
    /// Minimum over non-top classes.
    pub w_min: Option<f64>,
    pub w_max: Option<f64>,
    /// Extremes of `gap_i / W_ii^r` over non-top classes.
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    /// Largest trained spectral norm (MLP only).
    pub v_max: Option<f64>,
}

fn gap_stats(b: &[f64]) -> Result<(usize, Vec<f64>, Vec<ClassGap>, f64, f64)> {
    if b.len() < 2 {
        return Err(Error::Config("bias gap needs at least two classes".into()));
    }
    let mut top = 0;
    for (i, &v) in b.iter().enumerate() {
        if v > b[top] {
            top = i;
        }
    }
    let gaps: Vec<ClassGap> = (0..b.len())
        .filter(|&i| i != top)
        .map(|i| ClassGap {
            class: i,
            gap: b[top] - b[i],
        })
        .collect();
    let delta_min = gaps.iter().map(|g| g.gap).fold(f64::INFINITY, f64::min);
    let delta_max = gaps.iter().map(|g| g.gap).fold(f64::NEG_INFINITY, f64::max);
    if !(delta_min > 0.0) {
        return Err(Error::BiasGap(format!(
            "the largest trained bias (class {}) is not strictly above the others: min gap {delta_min}",
            top + 1
        )));
    }
    let mut sorted = b.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    Ok((top, sorted, gaps, delta_min, delta_max))
}

/// Statistics for the homogeneous model. `delta` is the largest absolute
/// initial parameter.
pub fn trained_stats_homo(model0: &HomoNet, model_t: &HomoNet) -> Result<TrainedStats> {
    ensure_len("initial vs trained classes", model0.k(), model_t.k())?;
    ensure_len("initial vs trained dim", model0.dim(), model_t.dim())?;
    if model0.degree() != model_t.degree() {
        return Err(Error::Config("initial and trained degrees differ".into()));
    }
    let r = model_t.degree();
    let k = model_t.k();
    if model_t.dim() < k {
        return Err(Error::shape("trained weight columns", k, model_t.dim()));
    }
    let (top, bias_sorted, gaps, delta_min, delta_max) = gap_stats(model_t.biases())?;
    let w = model_t.weights();
    let w_diag: Vec<f64> = (0..k).map(|i| w[(i, i)]).collect();
    let w_max = w_diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w_min = gaps.iter().map(|g| w_diag[g.class]).fold(f64::INFINITY, f64::min);
    let ratios: Vec<f64> = gaps.iter().map(|g| g.gap / powi(w_diag[g.class], r)).collect();
    let delta = model0
        .biases()
        .iter()
        .fold(model0.weights().max_abs(), |m, v| m.max(v.abs()));
    Ok(TrainedStats {
        delta,
        r,
        bias_sorted,
        top,
        gaps,
        delta_min,
        delta_max,
        w_diag,
        w_min: Some(w_min),
        w_max: Some(w_max),
        r_min: Some(ratios.iter().copied().fold(f64::INFINITY, f64::min)),
        r_max: Some(ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        v_max: None,
    })
}

/// Statistics for a last-bias MLP. `delta` is the largest initial spectral
/// norm and `v_max` the largest trained one.
pub fn trained_stats_mlp(
    model0: &MlpNet,
    model_t: &MlpNet,
    tol: f64,
    max_iter: usize,
) -> Result<TrainedStats> {
    match model_t.bias_mode() {
        BiasMode::Last => {}
        BiasMode::All => {
            return Err(Error::Unsupported(
                "plateau bounds cover networks with an output bias only",
            ))
        }
        BiasMode::None => {
            return Err(Error::BiasGap(
                "a network without an output bias has no bias gap".into(),
            ))
        }
    }
    if model0.widths() != model_t.widths() {
        return Err(Error::Config("initial and trained widths differ".into()));
    }
    let (top, bias_sorted, gaps, delta_min, delta_max) = gap_stats(model_t.output_bias())?;
    let s0 = model0.spectral_norms(tol, max_iter)?;
    let st = model_t.spectral_norms(tol, max_iter)?;
    Ok(TrainedStats {
        delta: s0.v_max,
        r: model_t.depth() as u32,
        bias_sorted,
        top,
        gaps,
        delta_min,
        delta_max,
        w_diag: Vec::new(),
        w_min: None,
        w_max: None,
        r_min: None,
        r_max: None,
        v_max: Some(st.v_max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsKind {
    Homo,
    Fcn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawAlphas {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaBounds {
    pub kind: BoundsKind,
    /// Boundaries clamped to `[0, 1]`.
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: Option<f64>,
    pub unclamped: RawAlphas,
    pub epsilon: f64,
    pub slack: f64,
    /// Upper limit on `delta` required by the bound, with unit constants.
    pub delta_limit: f64,
    pub hypothesis_met: bool,
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn check_epsilon(epsilon: f64, open_unit: bool) -> Result<()> {
    let ok = epsilon > 0.0 && epsilon.is_finite() && (!open_unit || epsilon < 1.0);
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("epsilon out of range: {epsilon}")))
    }
}

fn finish(kind: BoundsKind, raw: RawAlphas, epsilon: f64, slack: f64, delta: f64, limit: f64) -> AlphaBounds {
    AlphaBounds {
        kind,
        alpha1: clamp01(raw.alpha1),
        alpha2: clamp01(raw.alpha2),
        alpha3: clamp01(raw.alpha3),
        alpha4: raw.alpha4.map(clamp01),
        unclamped: raw,
        epsilon,
        slack,
        delta_limit: limit,
        hypothesis_met: delta <= limit,
    }
}

/// Boundaries for the homogeneous model.
pub fn alpha_bounds_homo(stats: &TrainedStats, r: u32, epsilon: f64, slack: f64) -> Result<AlphaBounds> {
    check_epsilon(epsilon, true)?;
    if !(slack >= 0.0) || !slack.is_finite() {
        return Err(Error::Config(format!("slack must be >= 0, got {slack}")));
    }
    let (Some(r_min), Some(r_max), Some(w_min), Some(w_max)) =
        (stats.r_min, stats.r_max, stats.w_min, stats.w_max)
    else {
        return Err(Error::Config("statistics lack the diagonal-weight ratios".into()));
    };
    if r < 3 || !(stats.delta_min > 0.0) {
        return Err(Error::Config(
            "invalid statistics for the homogeneous bounds".into(),
        ));
    }
    let rf = r as f64;
    let delta = stats.delta;
    let e1 = 1.0 / (rf - 1.0);
    let raw = RawAlphas {
        alpha1: delta / stats.delta_min,
        alpha2: libm::pow(1.0 / (1.0 + slack * libm::sqrt(delta)), rf * e1) * libm::pow(r_min, e1),
        alpha3: libm::pow(epsilon, 1.0 / rf) / w_max,
        alpha4: Some(libm::pow(1.0 + slack * delta, e1) * libm::pow(r_max / rf, e1)),
    };
    let limit = libm::pow(epsilon, 1.0 / rf)
        .min(libm::pow(r_min, e1) * libm::pow(stats.delta_min, 1.0 / rf))
        .min(libm::pow(w_min / w_max, 2.0 * rf / (rf - 2.0)));
    Ok(finish(BoundsKind::Homo, raw, epsilon, slack, delta, limit))
}

/// Boundaries for a depth-r network with an output bias. The hypothesis on
/// `delta` is reported, not enforced.
pub fn alpha_bounds_fcn(stats: &TrainedStats, r: u32, epsilon: f64) -> Result<AlphaBounds> {
    check_epsilon(epsilon, false)?;
    let Some(v_max) = stats.v_max else {
        return Err(Error::Config("statistics lack the trained spectral norm".into()));
    };
    if r < 3 || !(stats.delta_min > 0.0) || !(v_max > 0.0) {
        return Err(Error::Config("invalid statistics for the network bounds".into()));
    }
    let rf = r as f64;
    let delta = stats.delta;
    let e1 = 1.0 / (rf - 1.0);
    let raw = RawAlphas {
        alpha1: delta / stats.delta_min,
        alpha2: libm::pow(1.0 / (1.0 + libm::sqrt(delta)), rf * e1)
            * libm::pow(stats.delta_min / (2.0 * powi(v_max, r)), e1),
        alpha3: libm::pow(epsilon, 1.0 / rf) / v_max,
        alpha4: None,
    };
    let limit = (libm::pow(epsilon, 1.0 / rf) / rf)
        .min(1.0 / (rf * rf))
        .min(libm::pow(1.0 / (2.0 * E), 2.0 / (rf - 2.0)));
    let mut b = finish(BoundsKind::Fcn, raw, epsilon, 1.0, delta, limit);
    b.hypothesis_met = delta < limit;
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Pass,
    Fail,
    /// No grid point in the window, or the hypothesis on `delta` is unmet.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub name: String,
    pub status: ClaimStatus,
    /// Outcome on the grid regardless of the hypothesis; `None` without points.
    pub observed: Option<bool>,
    /// `None` when the boundary does not exist.
    pub window: Option<(f64, f64)>,
    pub points: usize,
    pub worst_alpha: Option<f64>,
    pub worst_violation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub claims: Vec<ClaimResult>,
    pub hypothesis_met: bool,
}

impl CheckReport {
    /// True iff no claim failed; vacuous claims do not count.
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.status != ClaimStatus::Fail)
    }

    pub fn claim(&self, name: &str) -> Option<&ClaimResult> {
        self.claims.iter().find(|c| c.name == name)
    }
}

struct Acc {
    points: usize,
    ok: bool,
    worst_alpha: Option<f64>,
    worst: f64,
}

impl Acc {
    fn new() -> Self {
        Self {
            points: 0,
            ok: true,
            worst_alpha: None,
            worst: 0.0,
        }
    }

    /// Records one check; `violation > 0` means failure.
    fn push(&mut self, alpha: f64, violation: f64, failed: bool) {
        self.points += 1;
        if failed {
            self.ok = false;
        }
        if self.worst_alpha.is_none() || violation > self.worst {
            self.worst = violation;
            self.worst_alpha = Some(alpha);
        }
    }

    fn finish(self, name: &str, window: Option<(f64, f64)>, tolerance: f64, hypothesis: bool) -> ClaimResult {
        let observed = (self.points > 0).then_some(self.ok);
        let status = match observed {
            None => ClaimStatus::Vacuous,
            Some(_) if !hypothesis => ClaimStatus::Vacuous,
            Some(true) => ClaimStatus::Pass,
            Some(false) => ClaimStatus::Fail,
        };
        ClaimResult {
            name: name.into(),
            status,
            observed,
            window,
            points: self.points,
            worst_alpha: self.worst_alpha,
            worst_violation: self.worst,
            tolerance,
        }
    }
}

/// Evaluates the five curve claims on the grid points inside each window.
///
/// `tolerance` widens the loss band; the error claims are exact and the
/// loss-decrease claim is strict. For the network bounds an unmet hypothesis
/// turns every claim vacuous while `observed` keeps the grid outcome.
pub fn check_claims(
    curve: &Curve,
    bounds: &AlphaBounds,
    stats: &TrainedStats,
    tolerance: f64,
) -> CheckReport {
    let k = curve.k;
    let n = curve.n;
    let plateau_count = n - n / k;
    let band_slack = match bounds.kind {
        BoundsKind::Homo => E * bounds.epsilon,
        BoundsKind::Fcn => 2.0 * E * bounds.epsilon,
    };
    let gate = bounds.kind == BoundsKind::Homo || bounds.hypothesis_met;
    let log_k = libm::log(k as f64);
    let pts = &curve.points;
    let in_win = |a: f64, lo: f64, hi: f64| a >= lo && a <= hi;
    let (a1, a2, a3) = (bounds.alpha1, bounds.alpha2, bounds.alpha3);

    let mut c1 = Acc::new();
    let mut c5 = Acc::new();
    for p in pts.iter().filter(|p| in_win(p.alpha, a1, a2)) {
        let v = p.misclassified.abs_diff(plateau_count) as f64 / n as f64;
        c1.push(p.alpha, v, p.misclassified != plateau_count);
        let top = p.predicted.get(stats.top).copied().unwrap_or(0);
        c5.push(p.alpha, (n - top) as f64 / n as f64, top != n);
    }

    let mut c2 = Acc::new();
    let win2: Vec<_> = pts.iter().filter(|p| in_win(p.alpha, a1, 1.0)).collect();
    for w in win2.windows(2) {
        let up = w[1].misclassified as f64 - w[0].misclassified as f64;
        c2.push(w[1].alpha, up.max(0.0) / n as f64, up > 0.0);
    }

    let mut c3 = Acc::new();
    for p in pts.iter().filter(|p| in_win(p.alpha, 0.0, a3)) {
        let lo = log_k - band_slack - tolerance;
        let hi = log_k + p.alpha * stats.delta_max + band_slack + tolerance;
        let v = (lo - p.mean_loss).max(p.mean_loss - hi);
        c3.push(p.alpha, v.max(0.0), v > 0.0);
    }

    let mut c4 = Acc::new();
    let window4 = match bounds.alpha4 {
        Some(a4) => {
            let win: Vec<_> = pts.iter().filter(|p| in_win(p.alpha, a4, 1.0)).collect();
            for w in win.windows(2) {
                let rise = w[1].mean_loss - w[0].mean_loss;
                c4.push(w[1].alpha, rise.max(0.0), rise >= 0.0);
            }
            Some((a4, 1.0))
        }
        None => None,
    };

    CheckReport {
        claims: alloc::vec![
            c1.finish("error_plateau", Some((a1, a2)), 0.0, gate),
            c2.finish("error_nonincreasing", Some((a1, 1.0)), 0.0, gate),
            c3.finish("loss_band", Some((0.0, a3)), tolerance, gate),
            c4.finish("loss_decreasing", window4, 0.0, gate),
            c5.finish("top_class_prediction", Some((a1, a2)), 0.0, gate),
        ],
        hypothesis_met: bounds.hypothesis_met,
    }
}
