//! Parameter paths between an initial and a trained model, and the loss/error
//! curves along them.
//!
//! Linear mode uses `(1 - a) theta_0 + a theta_T` for every parameter. The
//! homogeneous-bias mode keeps the weights linear and interpolates a bias of
//! depth `h` as `(1 - a)^h b_0 + a^h b_T`. The homogeneous model's bias has
//! depth `r`.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::eval::{evaluate, Classifier};
use crate::homonet::HomoNet;
use crate::linalg::{lerp_slice, powi, Matrix};
use crate::mlpnet::MlpNet;
use crate::synthdata::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpMode {
    Linear,
    HomogeneousBias,
}

impl InterpMode {
    pub fn name(self) -> &'static str {
        match self {
            InterpMode::Linear => "linear",
            InterpMode::HomogeneousBias => "homogeneous_bias",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(InterpMode::Linear),
            "homogeneous_bias" | "homogeneous" => Ok(InterpMode::HomogeneousBias),
            other => Err(Error::Config(format!("unknown interpolation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Homo,
    Mlp,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Homo => "homo",
            ModelKind::Mlp => "mlp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "homo" => Ok(ModelKind::Homo),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpSpec {
    alphas: Vec<f64>,
    mode: InterpMode,
}

impl InterpSpec {
    /// Strictly increasing grid in `[0, 1]` starting at 0 and ending at 1.
    pub fn new(alphas: Vec<f64>, mode: InterpMode) -> Result<Self> {
        if alphas.len() < 2 || alphas[0] != 0.0 || *alphas.last().unwrap_or(&0.0) != 1.0 {
            return Err(Error::Config(
                "interpolation grid must start at 0 and end at 1".into(),
            ));
        }
        if alphas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(
                "interpolation grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { alphas, mode })
    }

    /// `n` evenly spaced points `i / (n - 1)`.
    pub fn uniform(n: usize, mode: InterpMode) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {n}")));
        }
        let m = (n - 1) as f64;
        Self::new((0..n).map(|i| i as f64 / m).collect(), mode)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn mode(&self) -> InterpMode {
        self.mode
    }
}

/// `(1 - a)^h b0 + a^h bT`.
fn homogeneous_lerp(b0: &[f64], bt: &[f64], alpha: f64, h: u32) -> Vec<f64> {
    let (c0, c1) = (powi(1.0 - alpha, h), powi(alpha, h));
    b0.iter().zip(bt).map(|(x, y)| c0 * x + c1 * y).collect()
}

fn interp_bias(b0: &[f64], bt: &[f64], alpha: f64, mode: InterpMode, depth: u32) -> Vec<f64> {
    match mode {
        InterpMode::Linear => lerp_slice(b0, bt, alpha),
        InterpMode::HomogeneousBias => homogeneous_lerp(b0, bt, alpha, depth),
    }
}

/// Models that can be interpolated and evaluated along a path.
pub trait Interpolate: Classifier + Sized {
    const KIND: ModelKind;

    fn interp(theta0: &Self, theta_t: &Self, alpha: f64, mode: InterpMode) -> Result<Self>;
}

impl Interpolate for HomoNet {
    const KIND: ModelKind = ModelKind::Homo;

    fn interp(theta0: &Self, theta_t: &Self, alpha: f64, mode: InterpMode) -> Result<Self> {
        if theta0.degree() != theta_t.degree() {
            return Err(Error::Config(format!(
                "degree mismatch: {} vs {}",
                theta0.degree(),
                theta_t.degree()
            )));
        }
        let w = Matrix::lerp(theta0.weights(), theta_t.weights(), alpha)?;
        let b = interp_bias(theta0.biases(), theta_t.biases(), alpha, mode, theta0.degree());
        HomoNet::new(w, b, theta0.degree())
    }
}

impl Interpolate for MlpNet {
    const KIND: ModelKind = ModelKind::Mlp;

    fn interp(theta0: &Self, theta_t: &Self, alpha: f64, mode: InterpMode) -> Result<Self> {
        if theta0.activation() != theta_t.activation() || theta0.bias_mode() != theta_t.bias_mode() {
            return Err(Error::Config(
                "activation or bias mode differs between endpoints".into(),
            ));
        }
        ensure_len("layer count", theta0.depth(), theta_t.depth())?;
        let mut layers = Vec::with_capacity(theta0.depth());
        let mut biases = Vec::with_capacity(theta0.depth());
        for (l, (v0, vt)) in theta0.layers().iter().zip(theta_t.layers()).enumerate() {
            layers.push(Matrix::lerp(v0, vt, alpha)?);
            let (b0, bt) = (&theta0.biases()[l], &theta_t.biases()[l]);
            ensure_len("bias length", b0.len(), bt.len())?;
            biases.push(interp_bias(b0, bt, alpha, mode, l as u32 + 1));
        }
        MlpNet::new(layers, biases, theta0.activation(), theta0.bias_mode())
    }
}

pub fn interp_params<M: Interpolate>(theta0: &M, theta_t: &M, alpha: f64, mode: InterpMode) -> Result<M> {
    M::interp(theta0, theta_t, alpha, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub mean_loss: f64,
    pub misclassified: usize,
    /// Number of samples predicted as each class.
    pub predicted: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
    pub model_kind: ModelKind,
    pub mode: InterpMode,
    pub k: usize,
    pub n: usize,
}

impl CurvePoint {
    pub fn error(&self, n: usize) -> f64 {
        self.misclassified as f64 / n as f64
    }
}

impl Curve {
    pub fn errors(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.error(self.n)).collect()
    }
}

pub fn eval_curve<M: Interpolate>(theta0: &M, theta_t: &M, ds: &Dataset, spec: &InterpSpec) -> Result<Curve> {
    let mut points = Vec::with_capacity(spec.alphas().len());
    for &alpha in spec.alphas() {
        let m = M::interp(theta0, theta_t, alpha, spec.mode())?;
        let e = evaluate(&m, ds)?;
        points.push(CurvePoint {
            alpha,
            mean_loss: e.mean_loss,
            misclassified: e.misclassified,
            predicted: e.predicted,
        });
    }
    Ok(Curve {
        points,
        model_kind: M::KIND,
        mode: spec.mode(),
        k: ds.k(),
        n: ds.len(),
    })
}

/// Largest grid `alpha` such that every grid point in `(0, alpha]` has error
/// at least `1 - 1/k - tol`; 0 when the first positive grid point is already
/// below that floor.
pub fn plateau_length(curve: &Curve, tol: f64) -> f64 {
    let floor = 1.0 - 1.0 / curve.k as f64 - tol;
    let mut last = 0.0;
    for p in curve.points.iter().filter(|p| p.alpha > 0.0) {
        if p.error(curve.n) >= floor {
            last = p.alpha;
        } else {
            break;
        }
    }
    last
}
