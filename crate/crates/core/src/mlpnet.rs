//! Depth-r fully-connected networks `V_r s(V_{r-1} ... s(V_1 x) ...) + b`.
//!
//! Layer `l` (1-based) maps width `n_{l-1}` to `n_l`; the input is layer 0. A
//! bias added after the layer-`l` weights has depth `l`, so the output bias of
//! a depth-r net has depth `r`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::eval::{check_dataset, cross_entropy, softmax_into, Classifier};
use crate::linalg::{axpy, spectral_norm, Matrix};
use crate::rng::{self, Stream};
use crate::synthdata::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasMode {
    All,
    Last,
    None,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }

    fn apply(self, v: &mut [f64]) {
        if self == Activation::Relu {
            for x in v {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
        }
    }
}

impl BiasMode {
    pub fn name(self) -> &'static str {
        match self {
            BiasMode::All => "all",
            BiasMode::Last => "last",
            BiasMode::None => "none",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(BiasMode::All),
            "last" => Ok(BiasMode::Last),
            "none" => Ok(BiasMode::None),
            other => Err(Error::Config(format!("unknown bias mode `{other}`"))),
        }
    }

    fn has_bias(self, layer: usize, depth: usize) -> bool {
        match self {
            BiasMode::All => true,
            BiasMode::Last => layer + 1 == depth,
            BiasMode::None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpNet {
    layers: Vec<Matrix>,
    /// One vector per layer; empty where the bias mode puts no bias.
    biases: Vec<Vec<f64>>,
    activation: Activation,
    bias_mode: BiasMode,
}

/// Gradients with the same layout as the network. Absent biases are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrad {
    pub layers: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpGrad {
    /// Number of bias entries carried by the gradient.
    pub fn bias_len(&self) -> usize {
        self.biases.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub norms: Vec<f64>,
    pub v_max: f64,
    pub iterations: Vec<usize>,
    pub residual: Vec<f64>,
    /// False when some layer hit `max_iter` before reaching `tol`.
    pub converged: bool,
}

fn check_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 {
        return Err(Error::Config(String::from(
            "an MLP needs at least an input and an output width",
        )));
    }
    if widths.contains(&0) {
        return Err(Error::Config(format!(
            "layer widths must be positive: {widths:?}"
        )));
    }
    Ok(())
}

impl MlpNet {
    pub fn new(
        layers: Vec<Matrix>,
        biases: Vec<Vec<f64>>,
        activation: Activation,
        bias_mode: BiasMode,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config(String::from("an MLP needs at least one layer")));
        }
        let depth = layers.len();
        ensure_len("bias vector count", depth, biases.len())?;
        for l in 1..depth {
            ensure_len("adjacent layer widths", layers[l - 1].rows(), layers[l].cols())?;
        }
        for (l, (v, b)) in layers.iter().zip(&biases).enumerate() {
            let want = if bias_mode.has_bias(l, depth) { v.rows() } else { 0 };
            ensure_len("layer bias length", want, b.len())?;
            if !v.is_finite() || b.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("MLP parameters"));
            }
        }
        Ok(Self {
            layers,
            biases,
            activation,
            bias_mode,
        })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].cols()];
        w.extend(self.layers.iter().map(Matrix::rows));
        w
    }

    pub fn layers(&self) -> &[Matrix] {
        &self.layers
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn bias_mode(&self) -> BiasMode {
        self.bias_mode
    }

    /// The output bias (empty when the mode is `None`).
    pub fn output_bias(&self) -> &[f64] {
        &self.biases[self.depth() - 1]
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [Matrix], &mut [Vec<f64>]) {
        (&mut self.layers, &mut self.biases)
    }

    /// Largest absolute parameter.
    pub fn max_abs_param(&self) -> f64 {
        let w = self.layers.iter().map(Matrix::max_abs).fold(0.0, f64::max);
        self.biases.iter().flatten().fold(w, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(Matrix::is_finite) && self.biases.iter().flatten().all(|v| v.is_finite())
    }

    /// Activations of every layer for one input: `acts[0] = x`, `acts[l]` is
    /// the post-activation output of layer `l` (the last one is the logits).
    fn trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let depth = self.depth();
        let mut acts = Vec::with_capacity(depth + 1);
        acts.push(x.to_vec());
        for (l, (v, b)) in self.layers.iter().zip(&self.biases).enumerate() {
            let mut h = vec![0.0; v.rows()];
            v.matvec_into(&acts[l], &mut h);
            for (hi, bi) in h.iter_mut().zip(b) {
                *hi += bi;
            }
            if l + 1 < depth {
                self.activation.apply(&mut h);
            }
            acts.push(h);
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Result<crate::eval::Logits> {
        self.logits(x)
    }

    /// Mean cross-entropy `L / N` and its gradient.
    pub fn loss_grad(&self, ds: &Dataset) -> Result<(f64, MlpGrad)> {
        check_dataset(self, ds)?;
        let depth = self.depth();
        let inv_n = 1.0 / ds.len() as f64;
        let mut g = MlpGrad {
            layers: self
                .layers
                .iter()
                .map(|v| Matrix::zeros(v.rows(), v.cols()))
                .collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        };
        let mut total = 0.0;
        let mut u = vec![0.0; ds.k()];
        for s in ds.samples() {
            let acts = self.trace(&s.features);
            let z = &acts[depth];
            softmax_into(z, &mut u)?;
            total += cross_entropy(z, s.label);
            let mut delta: Vec<f64> = u.iter().map(|p| p * inv_n).collect();
            delta[s.label] -= inv_n;
            for l in (0..depth).rev() {
                let gl = &mut g.layers[l];
                for (i, &di) in delta.iter().enumerate() {
                    if di != 0.0 {
                        axpy(di, &acts[l], gl.row_mut(i));
                    }
                }
                if !g.biases[l].is_empty() {
                    axpy(1.0, &delta, &mut g.biases[l]);
                }
                if l == 0 {
                    break;
                }
                let mut back = vec![0.0; self.layers[l].cols()];
                self.layers[l].matvec_t_into(&delta, &mut back);
                if self.activation == Activation::Relu {
                    // the subgradient at 0 is 0; acts[l] == 0 exactly there
                    for (bk, &a) in back.iter_mut().zip(&acts[l]) {
                        if a <= 0.0 {
                            *bk = 0.0;
                        }
                    }
                }
                delta = back;
            }
        }
        if !total.is_finite() {
            return Err(Error::NonFinite("MLP loss"));
        }
        Ok((total * inv_n, g))
    }

    pub fn spectral_norms(&self, tol: f64, max_iter: usize) -> Result<SpectralReport> {
        let mut rep = SpectralReport {
            norms: Vec::with_capacity(self.depth()),
            v_max: 0.0,
            iterations: Vec::with_capacity(self.depth()),
            residual: Vec::with_capacity(self.depth()),
            converged: true,
        };
        for v in &self.layers {
            let p = spectral_norm(v, tol, max_iter)?;
            rep.norms.push(p.norm);
            rep.v_max = rep.v_max.max(p.norm);
            rep.iterations.push(p.iterations);
            rep.residual.push(p.residual);
            rep.converged &= p.converged;
        }
        Ok(rep)
    }
}

impl Classifier for MlpNet {
    fn num_classes(&self) -> usize {
        self.layers[self.depth() - 1].rows()
    }

    fn input_dim(&self) -> usize {
        self.layers[0].cols()
    }

    fn logits_into(&self, x: &[f64], out: &mut [f64]) {
        let mut acts = self.trace(x);
        out.copy_from_slice(&acts.pop().expect("at least one layer"));
    }
}

/// Gaussian fan-in init (`std = sqrt(2 / fan_in)`), every layer then scaled by
/// `beta^(1/r)` so the bias-free output scales by `beta`. Biases start at zero.
pub fn mlp_init(
    widths: &[usize],
    activation: Activation,
    bias_mode: BiasMode,
    seed: u64,
    beta: f64,
) -> Result<MlpNet> {
    check_widths(widths)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Config(format!(
            "output scale beta must be > 0, got {beta}"
        )));
    }
    let depth = widths.len() - 1;
    let factor = libm::pow(beta, 1.0 / depth as f64);
    let mut rng = rng::stream(seed, Stream::MlpWeights);
    let mut layers = Vec::with_capacity(depth);
    let mut biases = Vec::with_capacity(depth);
    for l in 0..depth {
        let (fan_in, fan_out) = (widths[l], widths[l + 1]);
        let std = libm::sqrt(2.0 / fan_in as f64);
        let data: Vec<f64> = (0..fan_in * fan_out)
            .map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                g * std * factor
            })
            .collect();
        layers.push(Matrix::from_vec(fan_out, fan_in, data)?);
        let len = if bias_mode.has_bias(l, depth) { fan_out } else { 0 };
        biases.push(vec![0.0; len]);
    }
    MlpNet::new(layers, biases, activation, bias_mode)
}
