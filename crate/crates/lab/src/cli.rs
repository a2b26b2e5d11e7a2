//! Command-line front end. Flags mirror config keys; exit codes are 0 for
//! success, 1 for configuration errors, violated assumptions or failed
//! claims, and 2 for numeric divergence.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{Arg, ArgMatches, Command};

use crate::commands::{self, Outcome};
use crate::config::{normalize_key, parse_kv, Params};
use crate::error::Result;
use crate::io::read_text;

fn opt(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("VALUE").help(help)
}

fn data_args(default_dim: &'static str) -> Vec<Arg> {
    vec![
        opt("data", "Load this dataset instead of generating one"),
        opt("k", "Number of classes [default: 4]"),
        opt("n", "Number of samples, divisible by k [default: 400]"),
        opt("dim", default_dim),
        opt("sigma", "Noise level [default: 0.05]"),
    ]
}

fn schedule_args() -> Vec<Arg> {
    vec![
        opt("eta", "Euler step size"),
        opt("total-time", "Minimum flow time"),
        opt(
            "horizon",
            "fixed, until_learned or until_zero_error [default: until_learned]",
        ),
        opt("max-time", "Flow-time cap for the open-ended horizons"),
        opt("stride", "Record a snapshot every this many steps"),
        opt(
            "mu2",
            "Class learned once min confidence >= 1 - mu2 [default: 0.1]",
        ),
        opt("mu3", "Required bias drop of a learned class [default: 0.1]"),
    ]
}

fn pair_args() -> Vec<Arg> {
    vec![
        opt("data", "Dataset file"),
        opt("init", "Initial snapshot"),
        opt("final", "Trained snapshot"),
        opt("grid", "Number of alpha grid points [default: 101]"),
    ]
}

pub fn command() -> Command {
    Command::new("plateau")
        .about("Interpolation-plateau experiments on synthetic data")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(opt("seed", "Global RNG seed [default: 0]").global(true))
        .arg(opt("out", "Existing output directory [default: .]").global(true))
        .arg(opt("config", "key = value file; flags override it").global(true))
        .subcommand(
            Command::new("gen-data")
                .about("Write a synthetic dataset")
                .args(data_args("Dimension [default: 4096]").into_iter().skip(1)),
        )
        .subcommand(
            Command::new("train-homo")
                .about("Train the homogeneous-weight model by gradient flow")
                .args(data_args("Dimension [default: 4096]"))
                .args(schedule_args())
                .args([
                    opt("delta", "Initialization scale [default: 0.1]"),
                    opt("r", "Homogeneity degree, >= 3 [default: 3]"),
                    opt("mu0", "Small diagonal threshold [default: 0.3]"),
                    opt("mu1", "Large diagonal threshold [default: 1.5]"),
                    opt("slack", "Induction-check slack constant [default: 10]"),
                ]),
        )
        .subcommand(
            Command::new("train-mlp")
                .about("Train a fully-connected network by gradient descent")
                .args(data_args("Dimension [default: 16]"))
                .args(schedule_args())
                .args([
                    opt("widths", "Comma-separated layer widths, dim first and k last"),
                    opt("activation", "relu or identity [default: relu]"),
                    opt("bias-mode", "all, last or none [default: last]"),
                    opt("beta", "Output scale of the initialization [default: 0.01]"),
                ]),
        )
        .subcommand(
            Command::new("interp")
                .about("Evaluate interpolation curves between two snapshots")
                .args(pair_args())
                .args([
                    opt(
                        "modes",
                        "Comma-separated modes [default: linear,homogeneous_bias]",
                    ),
                    opt(
                        "plateau-tol",
                        "Tolerance for the reported plateau length [default: 0.01]",
                    ),
                ]),
        )
        .subcommand(
            Command::new("check")
                .about("Compute the alpha boundaries and check the curve claims")
                .args(pair_args())
                .args([
                    opt("epsilon", "Loss-band epsilon [default: 0.01]"),
                    opt("slack", "Multiplier for the unspecified constants [default: 1]"),
                    opt("tolerance", "Extra width of the loss band [default: 1e-9]"),
                    opt("mode", "Interpolation mode [default: linear]"),
                    opt("power-tol", "Power-iteration tolerance [default: 1e-12]"),
                    opt("power-iter", "Power-iteration cap [default: 10000]"),
                ]),
        )
        .subcommand(
            Command::new("counterexample")
                .about("Analyse the two synthetic landscapes")
                .subcommand_required(true)
                .subcommand(
                    Command::new("hard")
                        .about("Tensor objective with a convex path")
                        .args([
                            opt("dim", "Dimension [default: 3]"),
                            opt("z0", "Initial z, above 3 sqrt(2) / 4 [default: 1.25]"),
                            opt("xstar", "Minimizer scale along e1 [default: 0.75]"),
                            opt("grid", "Grid points [default: 1000]"),
                        ]),
                )
                .subcommand(Command::new("easy").about("Radial objective with a bump").args([
                    opt("sweep", "Number of start angles in the bump sweep [default: 100]"),
                    opt("rho0", "Start radius for the sweep [default: 1]"),
                    opt("step", "Descent step [default: 1e-3]"),
                    opt("max-iters", "Descent iteration cap [default: 1000000]"),
                    opt("tol", "Gradient-norm tolerance [default: 1e-8]"),
                    opt("stride", "Record every this many iterations [default: 1000]"),
                    opt("starts", "Comma-separated start angles for descent"),
                ])),
        )
        .subcommand(
            Command::new("dynamics")
                .about("Dump confusion averages and bias rates of a snapshot")
                .args([
                    opt("data", "Dataset file"),
                    opt("model", "Homogeneous-model snapshot"),
                ]),
        )
}

/// Values given explicitly on the command line, keyed by config name.
fn flag_values(m: &ArgMatches) -> BTreeMap<String, String> {
    m.ids()
        .filter(|id| id.as_str() != "config")
        .filter(|id| m.value_source(id.as_str()) == Some(ValueSource::CommandLine))
        .filter_map(|id| {
            m.get_one::<String>(id.as_str())
                .map(|v| (normalize_key(id.as_str()), v.clone()))
        })
        .collect()
}

fn params(m: &ArgMatches) -> Result<Params> {
    let file = match m.get_one::<String>("config") {
        Some(path) => parse_kv(path, &read_text(Path::new(path))?)?,
        None => BTreeMap::new(),
    };
    Ok(Params::new(file, flag_values(m)))
}

fn dispatch(m: &ArgMatches) -> Result<Outcome> {
    let (name, sub) = m.subcommand().expect("subcommand required");
    if name == "counterexample" {
        let (which, leaf) = sub.subcommand().expect("subcommand required");
        let p = params(leaf)?;
        return match which {
            "hard" => commands::counterexample_hard(&p),
            _ => commands::counterexample_easy(&p),
        };
    }
    let p = params(sub)?;
    match name {
        "gen-data" => commands::gen_data(&p),
        "train-homo" => commands::train_homo(&p),
        "train-mlp" => commands::train_mlp_cmd(&p),
        "interp" => commands::interp(&p),
        "check" => commands::check(&p),
        "dynamics" => commands::dynamics(&p),
        other => unreachable!("unhandled subcommand {other}"),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let m = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&m) {
        Ok(o) => {
            for line in &o.lines {
                println!("{line}");
            }
            for p in &o.written {
                println!("wrote {}", p.display());
            }
            if o.passed {
                0
            } else {
                eprintln!("error: at least one checked claim failed");
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
