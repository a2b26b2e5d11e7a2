use std::fmt::Write as _;
use std::str::FromStr;

use plateau_core::counterexamples::DescentStep;
use plateau_core::interpolate::{Curve, CurvePoint, InterpMode, ModelKind};
use plateau_core::trainer::{MlpSnapshot, Snapshot};

use super::fmt_f64;
use crate::error::{LabError, Result};

/// `# key=value` header pairs in file order.
pub type Meta = Vec<(String, String)>;

/// A comma-separated table with `# key=value` header comments.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn cell<T: FromStr>(&self, source: &str, row: usize, col: usize) -> Result<T> {
        let s = &self.rows[row][col];
        s.parse().map_err(|_| {
            LabError::parse(
                source,
                row + 1,
                format!("cannot parse column {} from {s:?}", self.columns[col]),
            )
        })
    }

    fn expect_columns(&self, source: &str, want: &[String]) -> Result<()> {
        if self.columns != want {
            return Err(LabError::parse(
                source,
                0,
                format!(
                    "expected columns {}, found {}",
                    want.join(","),
                    self.columns.join(",")
                ),
            ));
        }
        Ok(())
    }
}

pub fn write_table(t: &Table) -> String {
    let mut out = String::new();
    for (k, v) in &t.meta {
        writeln!(out, "# {k}={v}").unwrap();
    }
    writeln!(out, "{}", t.columns.join(",")).unwrap();
    for r in &t.rows {
        writeln!(out, "{}", r.join(",")).unwrap();
    }
    out
}

pub fn read_table(source: &str, text: &str) -> Result<Table> {
    let meta = text
        .lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .filter_map(|c| c.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let bad = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        LabError::parse(source, line, e.to_string())
    };
    let columns = rdr.headers().map_err(bad)?.iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(bad)?;
    Ok(Table { meta, columns, rows })
}

fn per_class(prefix: &str, k: usize) -> impl Iterator<Item = String> + '_ {
    (1..=k).map(move |i| format!("{prefix}{i}"))
}

fn trajectory_columns(k: usize) -> Vec<String> {
    let mut c = vec!["t".to_string()];
    c.extend((1..=k).map(|i| format!("w{i}{i}")));
    c.push("offdiag_max".into());
    c.extend(per_class("b", k));
    c.extend(per_class("loss_c", k));
    c.extend(per_class("minconf_c", k));
    c.extend(["noise_corr_max", "loss", "misclassified"].map(String::from));
    c
}

fn floats(xs: &[f64]) -> impl Iterator<Item = String> + '_ {
    xs.iter().map(|&x| fmt_f64(x))
}

/// One row per snapshot. `meta` becomes header comments.
pub fn write_trajectory(snaps: &[Snapshot], meta: &[(String, String)]) -> String {
    let k = snaps.first().map_or(0, |s| s.biases.len());
    let mut t = Table::new(trajectory_columns(k));
    t.meta = meta.to_vec();
    for s in snaps {
        let mut r = vec![fmt_f64(s.t)];
        r.extend(floats(&s.diag_w));
        r.push(fmt_f64(s.offdiag_max));
        r.extend(floats(&s.biases));
        r.extend(floats(&s.class_loss));
        r.extend(floats(&s.class_minconf));
        r.push(fmt_f64(s.noise_corr_max));
        r.push(fmt_f64(s.loss));
        r.push(s.misclassified.to_string());
        t.rows.push(r);
    }
    write_table(&t)
}

pub fn read_trajectory(source: &str, text: &str) -> Result<(Vec<Snapshot>, Meta)> {
    let t = read_table(source, text)?;
    let k = t.columns.len().saturating_sub(5) / 4;
    t.expect_columns(source, &trajectory_columns(k))?;
    let mut out = Vec::with_capacity(t.rows.len());
    for i in 0..t.rows.len() {
        let f = |c: usize| t.cell::<f64>(source, i, c);
        let v = |start: usize| (start..start + k).map(f).collect::<Result<Vec<f64>>>();
        out.push(Snapshot {
            t: f(0)?,
            diag_w: v(1)?,
            offdiag_max: f(1 + k)?,
            biases: v(2 + k)?,
            class_loss: v(2 + 2 * k)?,
            class_minconf: v(2 + 3 * k)?,
            noise_corr_max: f(2 + 4 * k)?,
            loss: f(3 + 4 * k)?,
            misclassified: t.cell(source, i, 4 + 4 * k)?,
        });
    }
    Ok((out, t.meta))
}

fn mlp_columns(k: usize, nb: usize) -> Vec<String> {
    let mut c: Vec<String> = ["t", "loss", "misclassified"].map(String::from).to_vec();
    c.extend(per_class("b", nb));
    c.extend(per_class("loss_c", k));
    c.extend(per_class("minconf_c", k));
    c
}

/// `t, loss, misclassified, b1..bk, loss_c1.., minconf_c1..`; the bias
/// columns are absent for a network without an output bias.
pub fn write_mlp_trajectory(snaps: &[MlpSnapshot], meta: &[(String, String)]) -> String {
    let (k, nb) = snaps
        .first()
        .map_or((0, 0), |s| (s.class_loss.len(), s.output_bias.len()));
    let mut t = Table::new(mlp_columns(k, nb));
    t.meta = meta.to_vec();
    for s in snaps {
        let mut r = vec![fmt_f64(s.t), fmt_f64(s.loss), s.misclassified.to_string()];
        r.extend(floats(&s.output_bias));
        r.extend(floats(&s.class_loss));
        r.extend(floats(&s.class_minconf));
        t.rows.push(r);
    }
    write_table(&t)
}

pub fn read_mlp_trajectory(source: &str, text: &str) -> Result<(Vec<MlpSnapshot>, Meta)> {
    let t = read_table(source, text)?;
    let k = t.columns.iter().filter(|c| c.starts_with("loss_c")).count();
    let nb = t.columns.iter().filter(|c| c.starts_with('b')).count();
    t.expect_columns(source, &mlp_columns(k, nb))?;
    let mut out = Vec::with_capacity(t.rows.len());
    for i in 0..t.rows.len() {
        let f = |c: usize| t.cell::<f64>(source, i, c);
        let v = |start: usize, n: usize| (start..start + n).map(f).collect::<Result<Vec<f64>>>();
        out.push(MlpSnapshot {
            t: f(0)?,
            loss: f(1)?,
            misclassified: t.cell(source, i, 2)?,
            output_bias: v(3, nb)?,
            class_loss: v(3 + nb, k)?,
            class_minconf: v(3 + nb + k, k)?,
        });
    }
    Ok((out, t.meta))
}

fn curve_columns(k: usize) -> Vec<String> {
    let mut c: Vec<String> = ["alpha", "mean_loss", "error", "misclassified"]
        .map(String::from)
        .to_vec();
    c.extend(per_class("pred_c", k));
    c
}

/// `alpha, mean_loss, error` plus integer counts, so the curve can be read
/// back without loss.
pub fn write_curve(c: &Curve, dataset_hash: &str) -> String {
    let mut t = Table::new(curve_columns(c.k));
    t.meta = vec![
        ("model_kind".into(), c.model_kind.name().into()),
        ("mode".into(), c.mode.name().into()),
        ("grid".into(), c.points.len().to_string()),
        ("k".into(), c.k.to_string()),
        ("n".into(), c.n.to_string()),
        ("dataset_hash".into(), dataset_hash.into()),
    ];
    for p in &c.points {
        let mut r = vec![
            fmt_f64(p.alpha),
            fmt_f64(p.mean_loss),
            fmt_f64(p.error(c.n)),
            p.misclassified.to_string(),
        ];
        r.extend(p.predicted.iter().map(|v| v.to_string()));
        t.rows.push(r);
    }
    write_table(&t)
}

pub fn read_curve(source: &str, text: &str) -> Result<(Curve, String)> {
    let t = read_table(source, text)?;
    let need = |key: &str| {
        t.meta(key)
            .ok_or_else(|| LabError::parse(source, 0, format!("missing header `# {key}=`")))
    };
    let int = |key: &str| -> Result<usize> {
        need(key)?
            .parse()
            .map_err(|_| LabError::parse(source, 0, format!("bad header value for {key}")))
    };
    let (k, n, grid) = (int("k")?, int("n")?, int("grid")?);
    let kind = ModelKind::parse(need("model_kind")?)?;
    let mode = InterpMode::parse(need("mode")?)?;
    let hash = need("dataset_hash")?.to_string();
    t.expect_columns(source, &curve_columns(k))?;
    if t.rows.len() != grid {
        return Err(LabError::parse(
            source,
            0,
            format!("header says {grid} rows, found {}", t.rows.len()),
        ));
    }
    let mut points = Vec::with_capacity(grid);
    for i in 0..grid {
        points.push(CurvePoint {
            alpha: t.cell(source, i, 0)?,
            mean_loss: t.cell(source, i, 1)?,
            misclassified: t.cell(source, i, 3)?,
            predicted: (4..4 + k).map(|c| t.cell(source, i, c)).collect::<Result<_>>()?,
        });
    }
    let curve = Curve {
        points,
        model_kind: kind,
        mode,
        k,
        n,
    };
    Ok((curve, hash))
}

const DESCENT_COLUMNS: [&str; 5] = ["iter", "x", "y", "f", "grad_norm"];

pub fn write_descent(path: &[DescentStep], meta: &[(String, String)]) -> String {
    let mut t = Table::new(DESCENT_COLUMNS.map(String::from).to_vec());
    t.meta = meta.to_vec();
    for s in path {
        t.rows.push(vec![
            s.iter.to_string(),
            fmt_f64(s.x),
            fmt_f64(s.y),
            fmt_f64(s.f),
            fmt_f64(s.grad_norm),
        ]);
    }
    write_table(&t)
}

pub fn read_descent(source: &str, text: &str) -> Result<Vec<DescentStep>> {
    let t = read_table(source, text)?;
    t.expect_columns(source, &DESCENT_COLUMNS.map(String::from))?;
    (0..t.rows.len())
        .map(|i| {
            Ok(DescentStep {
                iter: t.cell(source, i, 0)?,
                x: t.cell(source, i, 1)?,
                y: t.cell(source, i, 2)?,
                f: t.cell(source, i, 3)?,
                grad_norm: t.cell(source, i, 4)?,
            })
        })
        .collect()
}
