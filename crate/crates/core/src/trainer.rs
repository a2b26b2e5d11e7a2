//! Explicit-Euler gradient flow with a one-level step-halving guard, stage
//! detection on the recorded trajectory and bias-rate bookkeeping.
//!
//! The homogeneous model is trained on `(k/N) L`. Its updates live in the span
//! of the training inputs, so the trainer keeps `P = W X^T` and the
//! accumulated coefficients `A` (with `W = W_0 - A X`) and steps through the
//! Gram matrix `X X^T`: one step costs `k N^2` instead of `k N d`.
//! The MLP is trained on the mean loss `L / N` by plain backprop.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{self, cross_entropy, softmax_into};
use crate::homonet::HomoNet;
use crate::linalg::{axpy, dot, powi, Matrix};
use crate::mlpnet::MlpNet;
use crate::synthdata::Dataset;

pub use crate::eval::confusion;

/// Thresholds standing in for the unspecified small/large constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageThresholds {
    /// A diagonal weight counts as "started" once it reaches `mu0`.
    pub mu0: f64,
    /// A diagonal weight counts as "large" once it reaches `mu1`.
    pub mu1: f64,
    /// A class is learned once its minimum confidence is at least `1 - mu2`.
    pub mu2: f64,
    /// Required drop of a learned class's bias below the largest bias.
    pub mu3: f64,
}

impl Default for StageThresholds {
    fn default() -> Self {
        Self {
            mu0: 0.3,
            mu1: 1.5,
            mu2: 0.1,
            mu3: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Horizon {
    /// Stop at `total_time`.
    Fixed,
    /// Run at least `total_time`, then continue until every class is learned
    /// or `max_time` is reached.
    UntilLearned { max_time: f64 },
    /// Run at least `total_time`, then continue until the training error is
    /// zero or `max_time` is reached.
    UntilZeroError { max_time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub step_size: f64,
    pub total_time: f64,
    pub horizon: Horizon,
    pub record_stride: usize,
    pub thresholds: StageThresholds,
    /// Slack multiplier `c` used by [`check_induction`].
    pub slack: f64,
}

impl TrainConfig {
    /// Budget `T0 = ln(1/delta) / delta^(r-2)`, extended up to `10 T0` until
    /// all classes are learned.
    pub fn homo_default(delta: f64, r: u32) -> Self {
        let t0 = libm::log(1.0 / delta) / powi(delta, r - 2);
        Self {
            step_size: 0.01,
            total_time: t0,
            horizon: Horizon::UntilLearned { max_time: 10.0 * t0 },
            record_stride: 10,
            thresholds: StageThresholds::default(),
            slack: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::Config(format!(
                "step_size must be > 0, got {}",
                self.step_size
            )));
        }
        if !(self.total_time >= self.step_size) || !self.total_time.is_finite() {
            return Err(Error::Config(format!(
                "total_time ({}) must be finite and >= step_size ({})",
                self.total_time, self.step_size
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be >= 1".into()));
        }
        match self.horizon {
            Horizon::Fixed => {}
            Horizon::UntilLearned { max_time } | Horizon::UntilZeroError { max_time } => {
                if !(max_time >= self.total_time) || !max_time.is_finite() {
                    return Err(Error::Config(format!(
                        "max_time ({max_time}) must be finite and >= total_time ({})",
                        self.total_time
                    )));
                }
            }
        }
        Ok(())
    }

    fn max_time(&self) -> f64 {
        match self.horizon {
            Horizon::Fixed => self.total_time,
            Horizon::UntilLearned { max_time } | Horizon::UntilZeroError { max_time } => max_time,
        }
    }
}

/// A step that raised the loss by more than 10% and was retried at half size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepHalving {
    pub step: usize,
    /// Flow time at the start of the step.
    pub t: f64,
    pub loss_before: f64,
    pub rejected_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub diag_w: Vec<f64>,
    /// `max_{j != j'} W_{j,j'}` over `j, j' < k`.
    pub offdiag_max: f64,
    pub biases: Vec<f64>,
    pub class_loss: Vec<f64>,
    pub class_minconf: Vec<f64>,
    /// `max_{j, x} |<W_j, noise_x>|`.
    pub noise_corr_max: f64,
    pub loss: f64,
    pub misclassified: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub initial_model: HomoNet,
    pub final_model: HomoNet,
    pub halvings: Vec<StepHalving>,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSnapshot {
    pub t: f64,
    pub loss: f64,
    pub misclassified: usize,
    pub output_bias: Vec<f64>,
    pub class_loss: Vec<f64>,
    pub class_minconf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpTrajectory {
    pub snapshots: Vec<MlpSnapshot>,
    pub initial_model: MlpNet,
    pub final_model: MlpNet,
    pub halvings: Vec<StepHalving>,
    pub steps: usize,
}

/// Training failure. A divergence carries everything recorded up to the
/// last finite state.
#[derive(Debug)]
pub enum TrainError<T> {
    Invalid(Error),
    Diverged { t: f64, partial: Box<T> },
}

impl<T> From<Error> for TrainError<T> {
    fn from(e: Error) -> Self {
        TrainError::Invalid(e)
    }
}

impl<T> fmt::Display for TrainError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::Invalid(e) => e.fmt(f),
            TrainError::Diverged { t, .. } => {
                write!(
                    f,
                    "training diverged at flow time {t}: non-finite loss or parameters"
                )
            }
        }
    }
}

impl<T: fmt::Debug> core::error::Error for TrainError<T> {}

struct Assessment {
    loss: f64,
    misclassified: usize,
    /// `(k/N) (u_j - [j = y]) r P^(r-1)` per class and sample.
    coef: Matrix,
    db: Vec<f64>,
    class_loss: Vec<f64>,
    class_minconf: Vec<f64>,
}

impl Assessment {
    fn all_learned(&self, mu2: f64) -> bool {
        self.class_minconf.iter().all(|&c| c >= 1.0 - mu2)
    }
}

fn assess(p: &Matrix, b: &[f64], labels: &[usize], r: u32) -> Option<Assessment> {
    let (k, n) = (p.rows(), p.cols());
    let scale = k as f64 / n as f64;
    let mut coef = Matrix::zeros(k, n);
    let mut db = vec![0.0; k];
    let mut class_loss = vec![0.0; k];
    let mut class_minconf = vec![f64::INFINITY; k];
    let mut z = vec![0.0; k];
    let mut u = vec![0.0; k];
    let mut total = 0.0;
    let mut misclassified = 0;
    for (x, &y) in labels.iter().enumerate() {
        for j in 0..k {
            z[j] = powi(p[(j, x)], r) + b[j];
        }
        softmax_into(&z, &mut u).ok()?;
        if eval::argmax(&z) != y {
            misclassified += 1;
        }
        let ce = cross_entropy(&z, y);
        total += ce;
        class_loss[y] += ce;
        class_minconf[y] = class_minconf[y].min(u[y]);
        for j in 0..k {
            let g = u[j] - if j == y { 1.0 } else { 0.0 };
            db[j] += scale * g;
            coef[(j, x)] = scale * g * r as f64 * powi(p[(j, x)], r - 1);
        }
    }
    if !total.is_finite() {
        return None;
    }
    let per_class = (n / k) as f64;
    class_loss.iter_mut().for_each(|l| *l /= per_class);
    Some(Assessment {
        loss: total / n as f64,
        misclassified,
        coef,
        db,
        class_loss,
        class_minconf,
    })
}

struct GramState {
    p: Matrix,
    a: Matrix,
    b: Vec<f64>,
}

impl GramState {
    fn step(&self, coef: &Matrix, db: &[f64], gram: &Matrix, eta: f64) -> GramState {
        let mut next = GramState {
            p: self.p.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
        };
        for j in 0..coef.rows() {
            let prow = next.p.row_mut(j);
            for (x, &c) in coef.row(j).iter().enumerate() {
                if c != 0.0 {
                    axpy(-eta * c, gram.row(x), prow);
                }
            }
        }
        next.a.sub_scaled(coef, -eta);
        for (bj, g) in next.b.iter_mut().zip(db) {
            *bj -= eta * g;
        }
        next
    }

    fn is_finite(&self) -> bool {
        self.p.is_finite() && self.b.iter().all(|v| v.is_finite())
    }
}

struct HomoContext<'a> {
    ds: &'a Dataset,
    w0: &'a Matrix,
    labels: Vec<usize>,
}

impl HomoContext<'_> {
    /// The `k x k` block of `W = W_0 - A X`.
    fn block(&self, a: &Matrix) -> Matrix {
        let k = self.ds.k();
        let mut out = Matrix::zeros(k, k);
        for j in 0..k {
            for c in 0..k {
                let mut acc = 0.0;
                for (x, s) in self.ds.samples().iter().enumerate() {
                    acc += a[(j, x)] * s.features[c];
                }
                out[(j, c)] = self.w0[(j, c)] - acc;
            }
        }
        out
    }

    fn snapshot(&self, t: f64, st: &GramState, ev: &Assessment) -> Snapshot {
        let k = self.ds.k();
        let w = self.block(&st.a);
        let mut offdiag_max = f64::NEG_INFINITY;
        for j in 0..k {
            for c in 0..k {
                if j != c {
                    offdiag_max = offdiag_max.max(w[(j, c)]);
                }
            }
        }
        let mut noise_corr_max: f64 = 0.0;
        for j in 0..k {
            for (x, &y) in self.labels.iter().enumerate() {
                noise_corr_max = noise_corr_max.max((st.p[(j, x)] - w[(j, y)]).abs());
            }
        }
        Snapshot {
            t,
            diag_w: (0..k).map(|j| w[(j, j)]).collect(),
            offdiag_max,
            biases: st.b.clone(),
            class_loss: ev.class_loss.clone(),
            class_minconf: ev.class_minconf.clone(),
            noise_corr_max,
            loss: ev.loss,
            misclassified: ev.misclassified,
        }
    }

    fn model(&self, st: &GramState, r: u32) -> Result<HomoNet> {
        let mut w = self.w0.clone();
        for j in 0..st.a.rows() {
            let row = w.row_mut(j);
            for (x, s) in self.ds.samples().iter().enumerate() {
                let a = st.a[(j, x)];
                if a != 0.0 {
                    axpy(-a, &s.features, row);
                }
            }
        }
        HomoNet::new(w, st.b.clone(), r)
    }
}

fn gram_matrix(ds: &Dataset) -> Matrix {
    let n = ds.len();
    let s = ds.samples();
    let mut g = Matrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = dot(&s[a].features, &s[b].features);
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    g
}

fn keep_going(cfg: &TrainConfig, t: f64, learned: bool, zero_error: bool) -> bool {
    let eps = 0.5 * cfg.step_size;
    if t < cfg.total_time - eps {
        return true;
    }
    match cfg.horizon {
        Horizon::Fixed => false,
        Horizon::UntilLearned { max_time } => !learned && t < max_time - eps,
        Horizon::UntilZeroError { max_time } => !zero_error && t < max_time - eps,
    }
}

/// Gradient flow on `(k/N) L` for the homogeneous model.
pub fn train(
    model: &HomoNet,
    ds: &Dataset,
    cfg: &TrainConfig,
) -> core::result::Result<Trajectory, TrainError<Trajectory>> {
    cfg.validate()?;
    eval::check_dataset(model, ds)?;
    let (k, n, r) = (ds.k(), ds.len(), model.degree());
    let ctx = HomoContext {
        ds,
        w0: model.weights(),
        labels: ds.samples().iter().map(|s| s.label).collect(),
    };
    let gram = gram_matrix(ds);
    let mut p = Matrix::zeros(k, n);
    for j in 0..k {
        for (x, s) in ds.samples().iter().enumerate() {
            p[(j, x)] = dot(model.weights().row(j), &s.features);
        }
    }
    let mut state = GramState {
        p,
        a: Matrix::zeros(k, n),
        b: model.biases().to_vec(),
    };
    let mut ev = assess(&state.p, &state.b, &ctx.labels, r)
        .ok_or(TrainError::Invalid(Error::NonFinite("initial loss")))?;

    let mut snapshots = vec![ctx.snapshot(0.0, &state, &ev)];
    let mut halvings = Vec::new();
    let mut t = 0.0;
    let mut steps = 0usize;
    let eta = cfg.step_size;
    let mu2 = cfg.thresholds.mu2;

    while keep_going(cfg, t, ev.all_learned(mu2), ev.misclassified == 0) && t < cfg.max_time() {
        let mut h = eta;
        let mut next = state.step(&ev.coef, &ev.db, &gram, h);
        let mut next_ev = next
            .is_finite()
            .then(|| assess(&next.p, &next.b, &ctx.labels, r))
            .flatten();
        let rejected = next_ev.as_ref().map_or(f64::INFINITY, |e| e.loss);
        if rejected > 1.1 * ev.loss {
            halvings.push(StepHalving {
                step: steps,
                t,
                loss_before: ev.loss,
                rejected_loss: rejected,
            });
            h = 0.5 * eta;
            next = state.step(&ev.coef, &ev.db, &gram, h);
            next_ev = next
                .is_finite()
                .then(|| assess(&next.p, &next.b, &ctx.labels, r))
                .flatten();
        }
        let Some(nev) = next_ev else {
            if snapshots.last().map(|s| s.t) != Some(t) {
                snapshots.push(ctx.snapshot(t, &state, &ev));
            }
            let partial = Trajectory {
                snapshots,
                initial_model: model.clone(),
                final_model: ctx.model(&state, r)?,
                halvings,
                steps,
            };
            return Err(TrainError::Diverged {
                t,
                partial: Box::new(partial),
            });
        };
        state = next;
        ev = nev;
        t += h;
        steps += 1;
        if steps.is_multiple_of(cfg.record_stride) {
            snapshots.push(ctx.snapshot(t, &state, &ev));
        }
    }
    if snapshots.last().map(|s| s.t) != Some(t) {
        snapshots.push(ctx.snapshot(t, &state, &ev));
    }
    Ok(Trajectory {
        snapshots,
        initial_model: model.clone(),
        final_model: ctx.model(&state, r)?,
        halvings,
        steps,
    })
}

fn mlp_snapshot(t: f64, net: &MlpNet, ds: &Dataset) -> Result<MlpSnapshot> {
    let e = eval::evaluate(net, ds)?;
    Ok(MlpSnapshot {
        t,
        loss: e.mean_loss,
        misclassified: e.misclassified,
        output_bias: net.output_bias().to_vec(),
        class_loss: e.class_loss,
        class_minconf: e.class_minconf,
    })
}

fn mlp_step(net: &MlpNet, g: &crate::mlpnet::MlpGrad, h: f64) -> MlpNet {
    let mut next = net.clone();
    let (layers, biases) = next.parts_mut();
    for (v, dv) in layers.iter_mut().zip(&g.layers) {
        v.sub_scaled(dv, h);
    }
    for (b, db) in biases.iter_mut().zip(&g.biases) {
        axpy(-h, db, b);
    }
    next
}

/// Gradient descent on the mean loss `L / N` for the MLP, with the same
/// Euler step and halving guard as [`train`].
pub fn train_mlp(
    model: &MlpNet,
    ds: &Dataset,
    cfg: &TrainConfig,
) -> core::result::Result<MlpTrajectory, TrainError<MlpTrajectory>> {
    cfg.validate()?;
    let mut net = model.clone();
    let (mut loss, mut grad) = net.loss_grad(ds)?;
    let mut snapshots = vec![mlp_snapshot(0.0, &net, ds)?];
    let mut halvings = Vec::new();
    let mut t = 0.0;
    let mut steps = 0usize;
    let eta = cfg.step_size;
    let mut current = snapshots[0].clone();
    let learned = |s: &MlpSnapshot| s.class_minconf.iter().all(|&c| c >= 1.0 - cfg.thresholds.mu2);

    while keep_going(cfg, t, learned(&current), current.misclassified == 0) && t < cfg.max_time() {
        let mut h = eta;
        let mut next = mlp_step(&net, &grad, h);
        let mut next_lg = next.is_finite().then(|| next.loss_grad(ds).ok()).flatten();
        let rejected = next_lg.as_ref().map_or(f64::INFINITY, |v| v.0);
        if rejected > 1.1 * loss {
            halvings.push(StepHalving {
                step: steps,
                t,
                loss_before: loss,
                rejected_loss: rejected,
            });
            h = 0.5 * eta;
            next = mlp_step(&net, &grad, h);
            next_lg = next.is_finite().then(|| next.loss_grad(ds).ok()).flatten();
        }
        let Some((nl, ng)) = next_lg else {
            if snapshots.last().map(|s| s.t) != Some(t) {
                snapshots.push(mlp_snapshot(t, &net, ds)?);
            }
            let partial = MlpTrajectory {
                snapshots,
                initial_model: model.clone(),
                final_model: net,
                halvings,
                steps,
            };
            return Err(TrainError::Diverged {
                t,
                partial: Box::new(partial),
            });
        };
        net = next;
        loss = nl;
        grad = ng;
        t += h;
        steps += 1;
        let stop_check = matches!(
            cfg.horizon,
            Horizon::UntilLearned { .. } | Horizon::UntilZeroError { .. }
        ) && t >= cfg.total_time - 0.5 * eta;
        if steps.is_multiple_of(cfg.record_stride) || stop_check {
            current = mlp_snapshot(t, &net, ds)?;
            if steps.is_multiple_of(cfg.record_stride) {
                snapshots.push(current.clone());
            }
        }
    }
    if snapshots.last().map(|s| s.t) != Some(t) {
        snapshots.push(mlp_snapshot(t, &net, ds)?);
    }
    Ok(MlpTrajectory {
        snapshots,
        initial_model: model.clone(),
        final_model: net,
        halvings,
        steps,
    })
}

/// Event times per class; `None` means the threshold was never crossed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEvents {
    /// Classes sorted by `s`; classes never learned come last, by index.
    pub learn_order: Vec<usize>,
    /// First time the class minimum confidence reaches `1 - mu2`.
    pub s: Vec<Option<f64>>,
    /// First time `W_ii >= mu0`.
    pub t_small: Vec<Option<f64>>,
    /// First time `W_ii >= mu1`.
    pub t_large: Vec<Option<f64>>,
    /// First time `b_i <= max_j b_j - mu3`.
    pub bias_drop: Vec<Option<f64>>,
}

fn first_time<S>(snaps: &[S], time: impl Fn(&S) -> f64, pred: impl Fn(&S) -> bool) -> Option<f64> {
    snaps.iter().find(|s| pred(s)).map(time)
}

fn learn_order(s: &[Option<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| match (s[a], s[b]) {
        (Some(x), Some(y)) => x.total_cmp(&y).then(a.cmp(&b)),
        (Some(_), None) => core::cmp::Ordering::Less,
        (None, Some(_)) => core::cmp::Ordering::Greater,
        (None, None) => a.cmp(&b),
    });
    order
}

fn bias_dropped(b: &[f64], i: usize, mu3: f64) -> bool {
    let top = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    b[i] <= top - mu3
}

pub fn detect_stages(traj: &Trajectory, th: &StageThresholds) -> StageEvents {
    let snaps = &traj.snapshots;
    let k = snaps.first().map_or(0, |s| s.biases.len());
    let at = |sn: &Snapshot| sn.t;
    let s: Vec<Option<f64>> = (0..k)
        .map(|i| first_time(snaps, at, |sn| sn.class_minconf[i] >= 1.0 - th.mu2))
        .collect();
    let t_small = (0..k)
        .map(|i| first_time(snaps, at, |sn| sn.diag_w[i] >= th.mu0))
        .collect();
    let t_large = (0..k)
        .map(|i| first_time(snaps, at, |sn| sn.diag_w[i] >= th.mu1))
        .collect();
    let bias_drop = (0..k)
        .map(|i| first_time(snaps, at, |sn| bias_dropped(&sn.biases, i, th.mu3)))
        .collect();
    StageEvents {
        learn_order: learn_order(&s),
        s,
        t_small,
        t_large,
        bias_drop,
    }
}

/// Stage events for an MLP run. There is no diagonal weight, so `t_small`
/// and `t_large` are empty; `bias_drop` tracks the output bias.
pub fn detect_mlp_stages(traj: &MlpTrajectory, th: &StageThresholds) -> StageEvents {
    let snaps = &traj.snapshots;
    let k = snaps.first().map_or(0, |s| s.class_minconf.len());
    let at = |sn: &MlpSnapshot| sn.t;
    let s: Vec<Option<f64>> = (0..k)
        .map(|i| first_time(snaps, at, |sn| sn.class_minconf[i] >= 1.0 - th.mu2))
        .collect();
    let bias_drop = (0..k)
        .map(|i| {
            first_time(snaps, at, |sn| {
                !sn.output_bias.is_empty() && bias_dropped(&sn.output_bias, i, th.mu3)
            })
        })
        .collect();
    StageEvents {
        learn_order: learn_order(&s),
        s,
        t_small: Vec::new(),
        t_large: Vec::new(),
        bias_drop,
    }
}

/// Classes sorted by decreasing initial diagonal weight.
pub fn initial_diagonal_order(w0: &Matrix, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| w0[(b, b)].total_cmp(&w0[(a, a)]).then(a.cmp(&b)));
    order
}

/// Per-snapshot outcome of the trajectory-level induction checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InductionRow {
    pub t: f64,
    /// Not-yet-learned classes sit within `c delta^r` of the top bias and of
    /// each other.
    pub unlearned_biases: bool,
    /// Learned classes sit at least `mu3` below the top bias.
    pub learned_biases: bool,
    /// No diagonal falls below its initial value minus `c delta`.
    pub diagonals: bool,
    /// `offdiag_max <= c delta`.
    pub offdiagonal: bool,
    /// `noise_corr_max <= c delta`.
    pub noise: bool,
}

impl InductionRow {
    pub fn all(&self) -> bool {
        self.unlearned_biases && self.learned_biases && self.diagonals && self.offdiagonal && self.noise
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductionReport {
    pub rows: Vec<InductionRow>,
    /// Final bias of the last class in the learning order minus the largest
    /// other final bias.
    pub final_bias_gap: f64,
    pub last_class: usize,
}

impl InductionReport {
    /// First snapshot time at which a condition fails, with its name.
    pub fn first_failure(&self) -> Option<(f64, &'static str)> {
        self.rows.iter().find_map(|r| {
            let name = if !r.unlearned_biases {
                "unlearned_biases"
            } else if !r.learned_biases {
                "learned_biases"
            } else if !r.diagonals {
                "diagonals"
            } else if !r.offdiagonal {
                "offdiagonal"
            } else if !r.noise {
                "noise"
            } else {
                return None;
            };
            Some((r.t, name))
        })
    }
}

/// Checks the induction conclusions on every recorded snapshot.
///
/// At time `t` the learned classes are those with `s_i <= t`, except the last
/// class in the learning order, which is classified through its bias rather
/// than learned. The next class in the order is the one being learned and is
/// excluded from both bias conditions; the rest are not yet learned.
pub fn check_induction(traj: &Trajectory, delta: f64, cfg: &TrainConfig) -> InductionReport {
    let th = &cfg.thresholds;
    let ev = detect_stages(traj, th);
    let r = traj.initial_model.degree();
    let w0 = traj.initial_model.weights();
    let tol_b = cfg.slack * powi(delta, r);
    let tol_w = cfg.slack * delta;
    let k = ev.learn_order.len();
    let last_class = ev.learn_order.last().copied().unwrap_or(0);

    let rows = traj
        .snapshots
        .iter()
        .map(|sn| {
            let top = sn.biases.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let learned: Vec<usize> = ev
                .learn_order
                .iter()
                .copied()
                .filter(|&i| i != last_class && ev.s[i].is_some_and(|s| s <= sn.t))
                .collect();
            let unlearned: Vec<usize> = ev
                .learn_order
                .iter()
                .copied()
                .filter(|i| !learned.contains(i))
                .skip(1)
                .collect();
            let unlearned_biases = unlearned.iter().all(|&j| {
                sn.biases[j] >= top - tol_b
                    && unlearned
                        .iter()
                        .all(|&jp| (sn.biases[j] - sn.biases[jp]).abs() <= tol_b)
            });
            let learned_biases = learned.iter().all(|&j| sn.biases[j] <= top - th.mu3);
            let diagonals = (0..k).all(|j| sn.diag_w[j] >= w0[(j, j)] - tol_w);
            InductionRow {
                t: sn.t,
                unlearned_biases,
                learned_biases,
                diagonals,
                offdiagonal: sn.offdiag_max <= tol_w,
                noise: sn.noise_corr_max <= tol_w,
            }
        })
        .collect();

    let final_b = traj.final_model.biases();
    let others = final_b
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != last_class)
        .map(|(_, &b)| b)
        .fold(f64::NEG_INFINITY, f64::max);
    InductionReport {
        rows,
        final_bias_gap: final_b.get(last_class).map_or(f64::NAN, |b| b - others),
        last_class,
    }
}

/// `b_dot_i = 1 - k sum_j u_{i,j}` from a confusion matrix.
pub fn bias_rate_decomposition(conf: &Matrix) -> Vec<f64> {
    let k = conf.rows() as f64;
    (0..conf.rows())
        .map(|i| 1.0 - k * conf.row(i).iter().sum::<f64>())
        .collect()
}
