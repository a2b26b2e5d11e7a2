use std::fmt::Write as _;

use plateau_core::{Activation, BiasMode, HomoNet, Matrix, MlpNet};

use super::{join_f64, Lines};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSnapshot {
    Homo(HomoNet),
    Mlp(MlpNet),
}

fn hash_line(out: &mut String, dataset_hash: Option<&str>) {
    if let Some(h) = dataset_hash {
        writeln!(out, "# dataset_hash={h}").unwrap();
    }
}

fn write_matrix(out: &mut String, m: &Matrix) {
    for i in 0..m.rows() {
        writeln!(out, "{}", join_f64(m.row(i))).unwrap();
    }
}

/// Header `homo k d r`, then the k rows of W and one row of b.
pub fn write_homo(m: &HomoNet, dataset_hash: Option<&str>) -> String {
    let mut out = String::new();
    hash_line(&mut out, dataset_hash);
    writeln!(out, "homo {} {} {}", m.k(), m.dim(), m.degree()).unwrap();
    write_matrix(&mut out, m.weights());
    writeln!(out, "{}", join_f64(m.biases())).unwrap();
    out
}

/// Header `mlp r activation bias_mode widths...`, then each layer matrix
/// followed by its bias row when that layer has one.
pub fn write_mlp(m: &MlpNet, dataset_hash: Option<&str>) -> String {
    let mut out = String::new();
    hash_line(&mut out, dataset_hash);
    let widths: Vec<String> = m.widths().iter().map(|w| w.to_string()).collect();
    writeln!(
        out,
        "mlp {} {} {} {}",
        m.depth(),
        m.activation().name(),
        m.bias_mode().name(),
        widths.join(" ")
    )
    .unwrap();
    for (v, b) in m.layers().iter().zip(m.biases()) {
        write_matrix(&mut out, v);
        if !b.is_empty() {
            writeln!(out, "{}", join_f64(b)).unwrap();
        }
    }
    out
}

fn read_matrix(lines: &mut Lines<'_>, rows: usize, cols: usize) -> Result<Matrix> {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (n, line) = lines.next()?;
        data.extend(lines.floats(n, line, cols)?);
    }
    Ok(Matrix::from_vec(rows, cols, data)?)
}

/// Reads either snapshot kind, returning the recorded dataset hash if any.
pub fn read_snapshot(source: &str, text: &str) -> Result<(ModelSnapshot, Option<String>)> {
    let mut lines = Lines::new(source, text);
    let (n, header) = lines.next()?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    let model = match tok.first().copied() {
        Some("homo") => {
            if tok.len() != 4 {
                return Err(lines.err(n, "header must be `homo k d r`"));
            }
            let k: usize = lines.parse(n, "k", tok[1])?;
            let d: usize = lines.parse(n, "d", tok[2])?;
            let r: u32 = lines.parse(n, "r", tok[3])?;
            let w = read_matrix(&mut lines, k, d)?;
            let (nb, line) = lines.next()?;
            let b = lines.floats(nb, line, k)?;
            ModelSnapshot::Homo(HomoNet::new(w, b, r)?)
        }
        Some("mlp") => {
            if tok.len() < 5 {
                return Err(lines.err(n, "header must be `mlp r activation bias_mode widths...`"));
            }
            let r: usize = lines.parse(n, "r", tok[1])?;
            let act = Activation::parse(tok[2])?;
            let mode = BiasMode::parse(tok[3])?;
            let widths: Vec<usize> = tok[4..]
                .iter()
                .map(|t| lines.parse(n, "width", t))
                .collect::<Result<_>>()?;
            if widths.len() != r + 1 {
                return Err(lines.err(
                    n,
                    format!("depth {r} needs {} widths, found {}", r + 1, widths.len()),
                ));
            }
            let mut layers = Vec::with_capacity(r);
            let mut biases = Vec::with_capacity(r);
            for l in 0..r {
                layers.push(read_matrix(&mut lines, widths[l + 1], widths[l])?);
                let has_bias = match mode {
                    BiasMode::All => true,
                    BiasMode::Last => l + 1 == r,
                    BiasMode::None => false,
                };
                if has_bias {
                    let (nb, line) = lines.next()?;
                    biases.push(lines.floats(nb, line, widths[l + 1])?);
                } else {
                    biases.push(Vec::new());
                }
            }
            ModelSnapshot::Mlp(MlpNet::new(layers, biases, act, mode)?)
        }
        _ => return Err(lines.err(n, "header must start with `homo` or `mlp`")),
    };
    lines.expect_end()?;
    let hash = lines.meta.get("dataset_hash").cloned();
    Ok((model, hash))
}

#[cfg(test)]
mod tests {
    use super::*;
    use plateau_core::mlpnet::mlp_init;

    #[test]
    fn homo_round_trip() {
        let w = Matrix::from_rows(&[vec![0.1, -2.5e-300, 3.0], vec![1.0 / 3.0, 0.0, -7.0]]).unwrap();
        let m = HomoNet::new(w, vec![0.2, f64::MIN_POSITIVE], 4).unwrap();
        let text = write_homo(&m, Some("abc"));
        let (back, hash) = read_snapshot("mem", &text).unwrap();
        assert_eq!(back, ModelSnapshot::Homo(m));
        assert_eq!(hash.as_deref(), Some("abc"));
    }

    #[test]
    fn mlp_round_trip_all_modes() {
        for mode in [BiasMode::All, BiasMode::Last, BiasMode::None] {
            let m = mlp_init(&[4, 5, 3, 2], Activation::Relu, mode, 9, 0.7).unwrap();
            let (back, hash) = read_snapshot("mem", &write_mlp(&m, None)).unwrap();
            assert_eq!(back, ModelSnapshot::Mlp(m));
            assert!(hash.is_none());
        }
    }

    #[test]
    fn bad_headers() {
        assert!(read_snapshot("mem", "conv 1 2\n").is_err());
        assert!(read_snapshot("mem", "homo 1 2\n").is_err());
        assert!(read_snapshot("mem", "mlp 2 relu last 3 3\n").is_err());
        let m = HomoNet::new(Matrix::zeros(1, 1), vec![0.0], 3).unwrap();
        let text = write_homo(&m, None) + "1.0\n";
        assert!(read_snapshot("mem", &text).is_err());
    }
}
