//! One function per subcommand. Each validates its keys, writes its
//! artifacts atomically into the output directory and returns an [`Outcome`].

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};
use std::path::{Path, PathBuf};

use plateau_core::bounds::{
    alpha_bounds_fcn, alpha_bounds_homo, check_claims, trained_stats_homo, trained_stats_mlp, AlphaBounds,
    TrainedStats,
};
use plateau_core::counterexamples::{
    easy_bump, easy_descend, easy_eval, hard_curve, EasyPoint, SymTensor3, EASY_BUMP_BOUND,
};
use plateau_core::eval::{confusion, min_margin};
use plateau_core::interpolate::{eval_curve, plateau_length, Curve, InterpMode, InterpSpec, Interpolate};
use plateau_core::mlpnet::mlp_init;
use plateau_core::synthdata::{generate_dataset, init_weights};
use plateau_core::trainer::{
    bias_rate_decomposition, check_induction, detect_mlp_stages, detect_stages, initial_diagonal_order,
    train, train_mlp, Horizon, InductionReport, StageEvents, StepHalving, TrainConfig, TrainError,
};
use plateau_core::{Activation, BiasMode, Dataset, DatasetConfig, HomoNet};

use crate::config::Params;
use crate::error::{LabError, Result};
use crate::formats::{
    dataset_hash, fmt_f64, read_dataset, read_snapshot, write_curve, write_dataset, write_descent,
    write_homo, write_mlp, write_mlp_trajectory, write_table, write_trajectory, BoundsFile, DynamicsFile,
    EventsFile, InductionSummary, ModelSnapshot, ReportFile, Table,
};
use crate::io::{ensure_dir, read_text, write_atomic};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    /// False when a checked claim or inequality does not hold.
    pub passed: bool,
    pub written: Vec<PathBuf>,
    /// Human-readable summary lines.
    pub lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            passed: true,
            ..Self::default()
        }
    }

    fn write(&mut self, dir: &Path, name: &str, text: &str) -> Result<()> {
        let p = dir.join(name);
        write_atomic(&p, text.as_bytes())?;
        self.written.push(p);
        Ok(())
    }

    fn say(&mut self, line: String) {
        self.lines.push(line);
    }
}

const GLOBAL: [&str; 2] = ["seed", "out"];
const DATA: [&str; 5] = ["data", "k", "n", "dim", "sigma"];

fn known(command: &str, p: &Params, groups: &[&[&str]]) -> Result<()> {
    let all: Vec<&str> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    p.check_known(command, &all)
}

fn out_dir(p: &Params) -> Result<PathBuf> {
    let dir = PathBuf::from(p.get("out", ".".to_string())?);
    ensure_dir(&dir)?;
    Ok(dir)
}

fn seed(p: &Params) -> Result<u64> {
    p.get("seed", 0)
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn load_dataset(path: &Path) -> Result<(Dataset, String)> {
    let ds = read_dataset(&path.display().to_string(), &read_text(path)?)?;
    let h = dataset_hash(&ds);
    Ok((ds, h))
}

pub fn load_snapshot(path: &Path) -> Result<(ModelSnapshot, Option<String>)> {
    read_snapshot(&path.display().to_string(), &read_text(path)?)
}

/// Loads `data` when given, otherwise generates from `k, n, dim, sigma, seed`.
fn dataset_from(p: &Params, default_dim: usize) -> Result<Dataset> {
    if p.raw("data").is_some() {
        return Ok(load_dataset(&p.path("data")?)?.0);
    }
    let cfg = DatasetConfig {
        k: p.get("k", 4)?,
        n_total: p.get("n", 400)?,
        dim: p.get("dim", default_dim)?,
        noise_sigma: p.get("sigma", 0.05)?,
        seed: seed(p)?,
    };
    Ok(generate_dataset(&cfg)?)
}

pub fn gen_data(p: &Params) -> Result<Outcome> {
    known("gen-data", p, &[&GLOBAL, &DATA[1..]])?;
    let dir = out_dir(p)?;
    let ds = dataset_from(p, 4096)?;
    let mut o = Outcome::new();
    o.write(&dir, "dataset.txt", &write_dataset(&ds))?;
    o.say(format!("dataset_hash {}", dataset_hash(&ds)));
    Ok(o)
}

fn parse_horizon(p: &Params, total: f64, default_kind: &str, default_max: f64) -> Result<Horizon> {
    let max_time = p.get("max_time", default_max)?;
    match p.get("horizon", default_kind.to_string())?.as_str() {
        "fixed" => Ok(Horizon::Fixed),
        "until_learned" => Ok(Horizon::UntilLearned { max_time }),
        "until_zero_error" => Ok(Horizon::UntilZeroError { max_time }),
        other => Err(LabError::Config(format!(
            "horizon must be fixed, until_learned or until_zero_error, got {other:?} (total_time {total})"
        ))),
    }
}

fn apply_thresholds(p: &Params, cfg: &mut TrainConfig) -> Result<()> {
    let th = &mut cfg.thresholds;
    th.mu0 = p.get("mu0", th.mu0)?;
    th.mu1 = p.get("mu1", th.mu1)?;
    th.mu2 = p.get("mu2", th.mu2)?;
    th.mu3 = p.get("mu3", th.mu3)?;
    Ok(())
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn induction_summary(rep: &InductionReport, slack: f64) -> InductionSummary {
    let mut failures = BTreeMap::new();
    for r in &rep.rows {
        for (name, ok) in [
            ("unlearned_biases", r.unlearned_biases),
            ("learned_biases", r.learned_biases),
            ("diagonals", r.diagonals),
            ("offdiagonal", r.offdiagonal),
            ("noise", r.noise),
        ] {
            *failures.entry(name.to_string()).or_insert(0) += usize::from(!ok);
        }
    }
    InductionSummary {
        slack,
        rows_checked: rep.rows.len(),
        failures,
        first_failure: rep.first_failure().map(|(t, n)| (t, n.to_string())),
        last_class: rep.last_class + 1,
        final_bias_gap: rep.final_bias_gap,
    }
}

#[allow(clippy::too_many_arguments)]
fn events(
    hash: &str,
    kind: &str,
    ev: StageEvents,
    halvings: &[StepHalving],
    steps: usize,
    final_time: f64,
    final_misclassified: usize,
    diverged_at: Option<f64>,
) -> EventsFile {
    EventsFile {
        dataset_hash: hash.into(),
        model_kind: kind.into(),
        learn_order: one_based(&ev.learn_order),
        s: ev.s,
        t_small: ev.t_small,
        t_large: ev.t_large,
        bias_drop: ev.bias_drop,
        step_halvings: halvings.to_vec(),
        steps,
        final_time,
        final_misclassified,
        diverged_at,
        initial_diagonal_order: None,
        induction: None,
    }
}

fn hash_meta(hash: &str) -> Vec<(String, String)> {
    vec![("dataset_hash".to_string(), hash.to_string())]
}

pub fn train_homo(p: &Params) -> Result<Outcome> {
    const KEYS: [&str; 12] = [
        "delta",
        "r",
        "eta",
        "total_time",
        "horizon",
        "max_time",
        "stride",
        "mu0",
        "mu1",
        "mu2",
        "mu3",
        "slack",
    ];
    known("train-homo", p, &[&GLOBAL, &DATA, &KEYS])?;
    let dir = out_dir(p)?;
    let ds = dataset_from(p, 4096)?;
    let hash = dataset_hash(&ds);
    let delta: f64 = p.get("delta", 0.1)?;
    let r: u32 = p.get("r", 3)?;
    let w0 = init_weights(ds.k(), ds.dim(), delta, seed(p)?)?;
    let net = HomoNet::with_zero_bias(w0, r)?;

    let mut cfg = TrainConfig::homo_default(delta, r);
    cfg.step_size = p.get("eta", cfg.step_size)?;
    cfg.total_time = p.get("total_time", cfg.total_time)?;
    cfg.horizon = parse_horizon(p, cfg.total_time, "until_learned", 10.0 * cfg.total_time)?;
    cfg.record_stride = p.get("stride", cfg.record_stride)?;
    cfg.slack = p.get("slack", cfg.slack)?;
    apply_thresholds(p, &mut cfg)?;
    cfg.validate()?;

    let mut o = Outcome::new();
    o.write(&dir, "dataset.txt", &write_dataset(&ds))?;
    o.write(&dir, "homo_init.txt", &write_homo(&net, Some(&hash)))?;
    let (traj, diverged) = match train(&net, &ds, &cfg) {
        Ok(t) => (t, None),
        Err(TrainError::Invalid(e)) => return Err(e.into()),
        Err(TrainError::Diverged { t, partial }) => (*partial, Some(t)),
    };
    let fin = &traj.final_model;
    o.write(&dir, "homo_final.txt", &write_homo(fin, Some(&hash)))?;
    o.write(
        &dir,
        "trajectory.csv",
        &write_trajectory(&traj.snapshots, &hash_meta(&hash)),
    )?;

    let ev = detect_stages(&traj, &cfg.thresholds);
    let last = traj.snapshots.last().expect("at least the initial snapshot");
    let mut file = events(
        &hash,
        "homo",
        ev,
        &traj.halvings,
        traj.steps,
        last.t,
        last.misclassified,
        diverged,
    );
    let init_order = initial_diagonal_order(net.weights(), ds.k());
    file.initial_diagonal_order = Some(one_based(&init_order));
    let ind = check_induction(&traj, delta, &cfg);
    file.induction = Some(induction_summary(&ind, cfg.slack));
    o.write(&dir, "events.json", &json(&file)?)?;

    if let Some(t) = diverged {
        return Err(LabError::Diverged {
            t,
            written: dir.display().to_string(),
        });
    }
    o.say(format!(
        "steps {} final_time {} halvings {}",
        traj.steps,
        fmt_f64(last.t),
        traj.halvings.len()
    ));
    o.say(format!(
        "learn_order {:?} initial_diagonal_order {:?}",
        file.learn_order,
        one_based(&init_order)
    ));
    o.say(format!(
        "misclassified {} min_margin {} final_bias_gap {}",
        last.misclassified,
        fmt_f64(min_margin(fin, &ds)?),
        fmt_f64(ind.final_bias_gap)
    ));
    Ok(o)
}

fn parse_mlp_arch(p: &Params, ds: &Dataset) -> Result<(Vec<usize>, Activation, BiasMode)> {
    let default = format!("{},32,32,32,32,16,{}", ds.dim(), ds.k());
    let widths: Vec<usize> = p.list("widths", &default)?;
    if widths.first() != Some(&ds.dim()) || widths.last() != Some(&ds.k()) {
        return Err(LabError::Config(format!(
            "widths must start at dim {} and end at k {}, got {widths:?}",
            ds.dim(),
            ds.k()
        )));
    }
    let act = Activation::parse(&p.get("activation", "relu".to_string())?)?;
    let mode = BiasMode::parse(&p.get("bias_mode", "last".to_string())?)?;
    Ok((widths, act, mode))
}

pub fn train_mlp_cmd(p: &Params) -> Result<Outcome> {
    const KEYS: [&str; 11] = [
        "widths",
        "activation",
        "bias_mode",
        "beta",
        "eta",
        "total_time",
        "horizon",
        "max_time",
        "stride",
        "mu2",
        "mu3",
    ];
    known("train-mlp", p, &[&GLOBAL, &DATA, &KEYS])?;
    let dir = out_dir(p)?;
    let ds = dataset_from(p, 16)?;
    let hash = dataset_hash(&ds);
    let (widths, act, mode) = parse_mlp_arch(p, &ds)?;
    let net = mlp_init(&widths, act, mode, seed(p)?, p.get("beta", 0.01)?)?;

    let mut cfg = TrainConfig {
        step_size: p.get("eta", 0.05)?,
        total_time: p.get("total_time", 0.05)?,
        horizon: Horizon::Fixed,
        record_stride: p.get("stride", 50)?,
        thresholds: Default::default(),
        slack: 10.0,
    };
    cfg.horizon = parse_horizon(p, cfg.total_time, "until_learned", 1000.0)?;
    apply_thresholds(p, &mut cfg)?;
    cfg.validate()?;

    let mut o = Outcome::new();
    o.write(&dir, "dataset.txt", &write_dataset(&ds))?;
    o.write(&dir, "mlp_init.txt", &write_mlp(&net, Some(&hash)))?;
    let (traj, diverged) = match train_mlp(&net, &ds, &cfg) {
        Ok(t) => (t, None),
        Err(TrainError::Invalid(e)) => return Err(e.into()),
        Err(TrainError::Diverged { t, partial }) => (*partial, Some(t)),
    };
    o.write(&dir, "mlp_final.txt", &write_mlp(&traj.final_model, Some(&hash)))?;
    o.write(
        &dir,
        "mlp_trajectory.csv",
        &write_mlp_trajectory(&traj.snapshots, &hash_meta(&hash)),
    )?;
    let ev = detect_mlp_stages(&traj, &cfg.thresholds);
    let last = traj.snapshots.last().expect("at least the initial snapshot");
    let file = events(
        &hash,
        "mlp",
        ev,
        &traj.halvings,
        traj.steps,
        last.t,
        last.misclassified,
        diverged,
    );
    o.write(&dir, "mlp_events.json", &json(&file)?)?;
    if let Some(t) = diverged {
        return Err(LabError::Diverged {
            t,
            written: dir.display().to_string(),
        });
    }
    o.say(format!(
        "steps {} final_time {} halvings {}",
        traj.steps,
        fmt_f64(last.t),
        traj.halvings.len()
    ));
    o.say(format!(
        "learn_order {:?} misclassified {}",
        file.learn_order, last.misclassified
    ));
    Ok(o)
}

/// Dataset plus two snapshots of the same kind, all recorded against it.
struct Pair {
    ds: Dataset,
    hash: String,
    init: ModelSnapshot,
    fin: ModelSnapshot,
}

fn load_pair(p: &Params) -> Result<Pair> {
    let (ds, hash) = load_dataset(&p.path("data")?)?;
    let mut models = Vec::new();
    for key in ["init", "final"] {
        let path = p.path(key)?;
        let (m, h) = load_snapshot(&path)?;
        if let Some(h) = h {
            if h != hash {
                return Err(LabError::Config(format!(
                    "{} was recorded against dataset {h}, but {} hashes to {hash}",
                    path.display(),
                    p.raw("data").unwrap_or_default()
                )));
            }
        }
        models.push(m);
    }
    let fin = models.pop().unwrap();
    let init = models.pop().unwrap();
    match (&init, &fin) {
        (ModelSnapshot::Homo(_), ModelSnapshot::Homo(_)) | (ModelSnapshot::Mlp(_), ModelSnapshot::Mlp(_)) => {
        }
        _ => {
            return Err(LabError::Config(
                "init and final snapshots are different model kinds".into(),
            ))
        }
    }
    Ok(Pair { ds, hash, init, fin })
}

fn curve_for(pair: &Pair, spec: &InterpSpec) -> Result<Curve> {
    fn go<M: Interpolate>(a: &M, b: &M, ds: &Dataset, spec: &InterpSpec) -> Result<Curve> {
        Ok(eval_curve(a, b, ds, spec)?)
    }
    match (&pair.init, &pair.fin) {
        (ModelSnapshot::Homo(a), ModelSnapshot::Homo(b)) => go(a, b, &pair.ds, spec),
        (ModelSnapshot::Mlp(a), ModelSnapshot::Mlp(b)) => go(a, b, &pair.ds, spec),
        _ => unreachable!("kinds checked in load_pair"),
    }
}

pub fn interp(p: &Params) -> Result<Outcome> {
    known(
        "interp",
        p,
        &[
            &GLOBAL,
            &["data", "init", "final", "modes", "grid", "plateau_tol"],
        ],
    )?;
    let dir = out_dir(p)?;
    let pair = load_pair(p)?;
    let grid: usize = p.get("grid", 101)?;
    let tol: f64 = p.get("plateau_tol", 0.01)?;
    let modes: Vec<String> = p.list("modes", "linear,homogeneous_bias")?;
    let mut o = Outcome::new();
    for m in modes {
        let mode = InterpMode::parse(&m)?;
        let curve = curve_for(&pair, &InterpSpec::uniform(grid, mode)?)?;
        o.write(
            &dir,
            &format!("curve_{}.csv", mode.name()),
            &write_curve(&curve, &pair.hash),
        )?;
        o.say(format!(
            "{} plateau_length {}",
            mode.name(),
            fmt_f64(plateau_length(&curve, tol))
        ));
    }
    Ok(o)
}

pub fn check(p: &Params) -> Result<Outcome> {
    const KEYS: [&str; 10] = [
        "data",
        "init",
        "final",
        "epsilon",
        "slack",
        "tolerance",
        "grid",
        "mode",
        "power_tol",
        "power_iter",
    ];
    known("check", p, &[&GLOBAL, &KEYS])?;
    let dir = out_dir(p)?;
    let pair = load_pair(p)?;
    let eps: f64 = p.get("epsilon", 0.01)?;
    let tolerance: f64 = p.get("tolerance", 1e-9)?;
    let mode = InterpMode::parse(&p.get("mode", "linear".to_string())?)?;
    let spec = InterpSpec::uniform(p.get("grid", 101)?, mode)?;
    let (stats, bounds): (TrainedStats, AlphaBounds) = match (&pair.init, &pair.fin) {
        (ModelSnapshot::Homo(a), ModelSnapshot::Homo(b)) => {
            let s = trained_stats_homo(a, b)?;
            let bd = alpha_bounds_homo(&s, b.degree(), eps, p.get("slack", 1.0)?)?;
            (s, bd)
        }
        (ModelSnapshot::Mlp(a), ModelSnapshot::Mlp(b)) => {
            let s = trained_stats_mlp(a, b, p.get("power_tol", 1e-12)?, p.get("power_iter", 10_000)?)?;
            let bd = alpha_bounds_fcn(&s, b.depth() as u32, eps)?;
            (s, bd)
        }
        _ => unreachable!("kinds checked in load_pair"),
    };
    let curve = curve_for(&pair, &spec)?;
    let report = check_claims(&curve, &bounds, &stats, tolerance);
    let passed = report.passed();

    let mut o = Outcome::new();
    o.passed = passed;
    o.write(&dir, "curve_check.csv", &write_curve(&curve, &pair.hash))?;
    o.say(format!(
        "alpha1 {} alpha2 {} alpha3 {} alpha4 {} hypothesis_met {}",
        fmt_f64(bounds.alpha1),
        fmt_f64(bounds.alpha2),
        fmt_f64(bounds.alpha3),
        bounds.alpha4.map_or("none".to_string(), fmt_f64),
        bounds.hypothesis_met
    ));
    for c in &report.claims {
        o.say(format!("{} {:?} points {}", c.name, c.status, c.points));
    }
    let bf = BoundsFile {
        dataset_hash: pair.hash.clone(),
        bounds,
        stats,
    };
    o.write(&dir, "bounds.json", &json(&bf)?)?;
    let rf = ReportFile {
        dataset_hash: pair.hash.clone(),
        passed,
        report,
    };
    o.write(&dir, "report.json", &json(&rf)?)?;
    Ok(o)
}

pub fn dynamics(p: &Params) -> Result<Outcome> {
    known("dynamics", p, &[&GLOBAL, &["data", "model"]])?;
    let dir = out_dir(p)?;
    let (ds, hash) = load_dataset(&p.path("data")?)?;
    let model = match load_snapshot(&p.path("model")?)?.0 {
        ModelSnapshot::Homo(m) => m,
        ModelSnapshot::Mlp(_) => {
            return Err(LabError::Config(
                "dynamics needs a homogeneous-model snapshot".into(),
            ))
        }
    };
    let conf = confusion(&model, &ds)?;
    let rate = model.bias_rate(&ds)?;
    let dec = bias_rate_decomposition(&conf);
    let k = ds.k();
    let mut t = Table::new(
        std::iter::once("class".to_string())
            .chain((1..=k).map(|j| format!("u_c{j}")))
            .collect(),
    );
    t.meta = hash_meta(&hash);
    for i in 0..k {
        let mut row = vec![(i + 1).to_string()];
        row.extend(conf.row(i).iter().map(|&v| fmt_f64(v)));
        t.rows.push(row);
    }
    let diff = rate
        .iter()
        .zip(&dec)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let file = DynamicsFile {
        dataset_hash: hash,
        sum: rate.iter().sum(),
        bias_rate: rate,
        decomposition: dec,
        max_abs_difference: diff,
    };
    let mut o = Outcome::new();
    o.write(&dir, "confusion.csv", &write_table(&t))?;
    o.write(&dir, "dynamics.json", &json(&file)?)?;
    o.say(format!(
        "bias_rate sum {} max |rate - decomposition| {}",
        fmt_f64(file.sum),
        fmt_f64(diff)
    ));
    Ok(o)
}

fn two_columns(names: [&str; 2], xs: &[f64], ys: &[f64], meta: Vec<(String, String)>) -> String {
    let mut t = Table::new(names.map(String::from).to_vec());
    t.meta = meta;
    t.rows = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| vec![fmt_f64(x), fmt_f64(y)])
        .collect();
    write_table(&t)
}

pub fn counterexample_hard(p: &Params) -> Result<Outcome> {
    known(
        "counterexample hard",
        p,
        &[&GLOBAL, &["dim", "z0", "xstar", "grid"]],
    )?;
    let dir = out_dir(p)?;
    let dim: usize = p.get("dim", 3)?;
    let z0: f64 = p.get("z0", 1.25)?;
    let c: f64 = p.get("xstar", 0.75)?;
    let n: usize = p.get("grid", 1000)?;
    let t = SymTensor3::rank_one_basis(dim, 0)?;
    let mut xstar = vec![0.0; dim];
    xstar[0] = c;
    let curve = hard_curve(&t, z0, &xstar, n)?;
    let meta = vec![
        ("dim".to_string(), dim.to_string()),
        ("z0".to_string(), fmt_f64(z0)),
        ("xstar".to_string(), fmt_f64(c)),
    ];
    let mut o = Outcome::new();
    o.write(
        &dir,
        "hard_curve.csv",
        &two_columns(["alpha", "value"], &curve.alphas, &curve.values, meta.clone()),
    )?;
    let interior = &curve.alphas[1..curve.alphas.len() - 1];
    o.write(
        &dir,
        "hard_second_difference.csv",
        &two_columns(
            ["alpha", "second_difference"],
            interior,
            &curve.second_differences,
            meta,
        ),
    )?;
    o.passed = curve.is_convex() && curve.is_decreasing();
    let min2 = curve
        .second_differences
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let max1 = curve
        .first_differences
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    o.say(format!(
        "gamma(1) {} min_second_difference {} max_first_difference {} convex {} decreasing {}",
        fmt_f64(*curve.values.last().unwrap()),
        fmt_f64(min2),
        fmt_f64(max1),
        curve.is_convex(),
        curve.is_decreasing()
    ));
    Ok(o)
}

/// Start angles: the symmetric start is nudged off the invariant ray.
const DEFAULT_STARTS: &str = "-1.0471975511965976,1e-6,0.7853981633974483,1.0471975511965976";

pub fn counterexample_easy(p: &Params) -> Result<Outcome> {
    const KEYS: [&str; 7] = ["sweep", "rho0", "step", "max_iters", "tol", "stride", "starts"];
    known("counterexample easy", p, &[&GLOBAL, &KEYS])?;
    let dir = out_dir(p)?;
    let sweep: usize = p.get("sweep", 100)?;
    if sweep < 2 {
        return Err(LabError::Config(format!("sweep must be >= 2, got {sweep}")));
    }
    let rho0: f64 = p.get("rho0", 1.0)?;
    let step: f64 = p.get("step", 1e-3)?;
    let max_iters: usize = p.get("max_iters", 1_000_000)?;
    let tol: f64 = p.get("tol", 1e-8)?;
    let stride: usize = p.get("stride", 1000)?;
    let starts: Vec<f64> = p.list("starts", DEFAULT_STARTS)?;

    let mut o = Outcome::new();
    let betas: Vec<f64> = (0..sweep)
        .map(|i| -FRAC_PI_3 + 2.0 * FRAC_PI_3 * i as f64 / (sweep - 1) as f64)
        .collect();
    let bumps: Vec<f64> = betas
        .iter()
        .map(|&b| easy_bump(b, rho0))
        .collect::<Result<_, _>>()?;
    let meta = vec![("rho0".to_string(), fmt_f64(rho0))];
    o.write(
        &dir,
        "easy_bump.csv",
        &two_columns(["beta", "bump"], &betas, &bumps, meta),
    )?;
    let min_bump = bumps.iter().copied().fold(f64::INFINITY, f64::min);
    // the lower bound is only claimed for unit radius
    let bump_ok = rho0 != 1.0 || min_bump >= EASY_BUMP_BOUND - 1e-9;
    o.say(format!(
        "min_bump {} bound {} ok {}",
        fmt_f64(min_bump),
        fmt_f64(EASY_BUMP_BOUND),
        bump_ok
    ));

    let mut all_ok = true;
    for (i, &beta) in starts.iter().enumerate() {
        let start = EasyPoint::new(beta.sin(), beta.cos());
        let d = easy_descend(start, step, max_iters, tol, stride)?;
        let dist = d.last.x.hypot(d.last.y + 1.0);
        let ok = d.converged && dist <= 1e-4;
        all_ok &= ok;
        let meta = vec![
            ("beta".to_string(), fmt_f64(beta)),
            ("step".to_string(), fmt_f64(step)),
        ];
        o.write(
            &dir,
            &format!("easy_descent_{}.csv", i + 1),
            &write_descent(&d.path, &meta),
        )?;
        o.say(format!(
            "descent beta {} iterations {} final ({}, {}) distance {} ok {ok}",
            fmt_f64(beta),
            d.iterations,
            fmt_f64(d.last.x),
            fmt_f64(d.last.y),
            fmt_f64(dist)
        ));
    }
    let (s, c) = (FRAC_PI_6.sin(), FRAC_PI_6.cos());
    o.say(format!(
        "f(0,1) {} f(midpoint) {}",
        fmt_f64(easy_eval(EasyPoint::new(0.0, 1.0))),
        fmt_f64(easy_eval(EasyPoint::new(s * c, -s * s)))
    ));
    o.passed = bump_ok && all_ok;
    Ok(o)
}
