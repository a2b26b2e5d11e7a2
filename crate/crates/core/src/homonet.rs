//! The r-homogeneous-weight model: `f_i(x) = <W_i, x>^r + b_i`.
//!
//! The signal term is degree-r homogeneous in `W` while the bias is degree 1,
//! which is what makes the bias dominate early along a linear interpolation.
//!
//! Sign convention: [`HomoNet::grad`] returns the ascent gradient of the
//! scaled loss `(k/N) L`; [`HomoNet::bias_rate`] returns the gradient-flow
//! velocity of the biases, `b_dot_i = 1 - (k/N) sum_x u_i(x) = -db_i`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::eval::{self, check_dataset, softmax_into, Classifier, Logits};
use crate::linalg::{axpy, dot, powi, Matrix};
use crate::synthdata::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomoNet {
    w: Matrix,
    b: Vec<f64>,
    r: u32,
}

/// Ascent gradient of `(k/N) L` with respect to `W` and `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub dw: Matrix,
    pub db: Vec<f64>,
}

impl HomoNet {
    pub fn new(w: Matrix, b: Vec<f64>, r: u32) -> Result<Self> {
        if r < 3 {
            return Err(Error::Config(format!(
                "homogeneity degree r must be >= 3, got {r}"
            )));
        }
        ensure_len("bias length vs weight rows", w.rows(), b.len())?;
        if !w.is_finite() {
            return Err(Error::NonFinite("weights"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("biases"));
        }
        Ok(Self { w, b, r })
    }

    /// Model with the given weights and zero biases.
    pub fn with_zero_bias(w: Matrix, r: u32) -> Result<Self> {
        let k = w.rows();
        Self::new(w, vec![0.0; k], r)
    }

    pub fn weights(&self) -> &Matrix {
        &self.w
    }

    pub fn biases(&self) -> &[f64] {
        &self.b
    }

    pub fn degree(&self) -> u32 {
        self.r
    }

    pub fn k(&self) -> usize {
        self.w.rows()
    }

    pub fn dim(&self) -> usize {
        self.w.cols()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Logits> {
        self.logits(x)
    }

    pub fn mean_loss(&self, ds: &Dataset) -> Result<f64> {
        eval::mean_loss(self, ds)
    }

    pub fn error_rate(&self, ds: &Dataset) -> Result<f64> {
        eval::error_rate(self, ds)
    }

    pub fn grad(&self, ds: &Dataset) -> Result<GradientPair> {
        check_dataset(self, ds)?;
        let k = self.k();
        let scale = k as f64 / ds.len() as f64;
        let r = self.r;
        let mut dw = Matrix::zeros(k, self.dim());
        let mut db = vec![0.0; k];
        let mut p = vec![0.0; k];
        let mut z = vec![0.0; k];
        let mut u = vec![0.0; k];
        for s in ds.samples() {
            for i in 0..k {
                p[i] = dot(self.w.row(i), &s.features);
                z[i] = powi(p[i], r) + self.b[i];
            }
            softmax_into(&z, &mut u)?;
            for i in 0..k {
                let g = u[i] - if i == s.label { 1.0 } else { 0.0 };
                db[i] += scale * g;
                let coef = scale * g * r as f64 * powi(p[i], r - 1);
                if coef != 0.0 {
                    axpy(coef, &s.features, dw.row_mut(i));
                }
            }
        }
        Ok(GradientPair { dw, db })
    }

    /// `b_dot_i = 1 - (k/N) sum_{x in S} u_i(x)`.
    pub fn bias_rate(&self, ds: &Dataset) -> Result<Vec<f64>> {
        check_dataset(self, ds)?;
        let k = self.k();
        let mut z = vec![0.0; k];
        let mut u = vec![0.0; k];
        let mut mass = vec![0.0; k];
        for s in ds.samples() {
            self.logits_into(&s.features, &mut z);
            softmax_into(&z, &mut u)?;
            for (m, ui) in mass.iter_mut().zip(&u) {
                *m += ui;
            }
        }
        let scale = k as f64 / ds.len() as f64;
        Ok(mass.iter().map(|m| 1.0 - scale * m).collect())
    }
}

impl Classifier for HomoNet {
    fn num_classes(&self) -> usize {
        self.k()
    }

    fn input_dim(&self) -> usize {
        self.dim()
    }

    fn logits_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = powi(dot(self.w.row(i), x), self.r) + self.b[i];
        }
    }
}
