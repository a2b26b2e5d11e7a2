//! Softmax, cross-entropy and classification statistics shared by every model.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::Matrix;
use crate::synthdata::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logits(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxOutput(pub Vec<f64>);

impl Logits {
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Max-subtracted softmax.
pub fn softmax(logits: &Logits) -> Result<SoftmaxOutput> {
    let mut out = vec![0.0; logits.0.len()];
    softmax_into(&logits.0, &mut out)?;
    Ok(SoftmaxOutput(out))
}

pub(crate) fn softmax_into(z: &[f64], out: &mut [f64]) -> Result<()> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logits"));
    }
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &v) in out.iter_mut().zip(z) {
        *o = libm::exp(v - m);
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
    Ok(())
}

/// `-log softmax(z)[label]`, computed as `logsumexp(z) - z[label]`.
pub(crate) fn cross_entropy(z: &[f64], label: usize) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = z.iter().map(|&v| libm::exp(v - m)).sum();
    m + libm::log(s) - z[label]
}

/// A k-class model mapping a `d`-vector to `k` logits.
pub trait Classifier {
    fn num_classes(&self) -> usize;
    fn input_dim(&self) -> usize;
    /// Writes the logits for `x` into `out` (length `num_classes`). Callers
    /// guarantee the lengths.
    fn logits_into(&self, x: &[f64], out: &mut [f64]);

    fn logits(&self, x: &[f64]) -> Result<Logits> {
        ensure_len("input vector", self.input_dim(), x.len())?;
        let mut out = vec![0.0; self.num_classes()];
        self.logits_into(x, &mut out);
        Ok(Logits(out))
    }
}

pub(crate) fn check_dataset<C: Classifier + ?Sized>(model: &C, ds: &Dataset) -> Result<()> {
    ensure_len("model classes vs dataset classes", ds.k(), model.num_classes())?;
    ensure_len("model input dim vs dataset dim", ds.dim(), model.input_dim())
}

/// Per-sample evaluation summary over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub mean_loss: f64,
    pub misclassified: usize,
    /// Number of samples predicted as each class.
    pub predicted: Vec<usize>,
    /// Mean cross-entropy restricted to each class group.
    pub class_loss: Vec<f64>,
    /// `min_{x in S_c} u_c(x)` per class.
    pub class_minconf: Vec<f64>,
}

pub fn evaluate<C: Classifier + ?Sized>(model: &C, ds: &Dataset) -> Result<Evaluation> {
    check_dataset(model, ds)?;
    let k = ds.k();
    let mut z = vec![0.0; k];
    let mut u = vec![0.0; k];
    let mut predicted = vec![0usize; k];
    let mut class_loss = vec![0.0; k];
    let mut class_minconf = vec![f64::INFINITY; k];
    let mut misclassified = 0;
    for s in ds.samples() {
        model.logits_into(&s.features, &mut z);
        softmax_into(&z, &mut u)?;
        let p = argmax(&z);
        predicted[p] += 1;
        if p != s.label {
            misclassified += 1;
        }
        class_loss[s.label] += cross_entropy(&z, s.label);
        class_minconf[s.label] = class_minconf[s.label].min(u[s.label]);
    }
    let per_class = ds.config().per_class() as f64;
    let total: f64 = class_loss.iter().sum();
    class_loss.iter_mut().for_each(|l| *l /= per_class);
    Ok(Evaluation {
        mean_loss: total / ds.len() as f64,
        misclassified,
        predicted,
        class_loss,
        class_minconf,
    })
}

/// Average per-sample cross-entropy `L / N`.
pub fn mean_loss<C: Classifier + ?Sized>(model: &C, ds: &Dataset) -> Result<f64> {
    check_dataset(model, ds)?;
    let mut z = vec![0.0; ds.k()];
    let mut total = 0.0;
    for s in ds.samples() {
        model.logits_into(&s.features, &mut z);
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("logits"));
        }
        total += cross_entropy(&z, s.label);
    }
    Ok(total / ds.len() as f64)
}

pub fn misclassified<C: Classifier + ?Sized>(model: &C, ds: &Dataset) -> Result<usize> {
    check_dataset(model, ds)?;
    let mut z = vec![0.0; ds.k()];
    Ok(ds
        .samples()
        .iter()
        .filter(|s| {
            model.logits_into(&s.features, &mut z);
            argmax(&z) != s.label
        })
        .count())
}

/// Misclassified fraction with argmax ties broken toward the lowest index.
pub fn error_rate<C: Classifier + ?Sized>(model: &C, ds: &Dataset) -> Result<f64> {
    Ok(misclassified(model, ds)? as f64 / ds.len() as f64)
}

/// Smallest margin `f_y(x) - max_{j != y} f_j(x)` over the dataset.
pub fn min_margin<C: Classifier + ?Sized>(model: &C, ds: &Dataset) -> Result<f64> {
    check_dataset(model, ds)?;
    let mut z = vec![0.0; ds.k()];
    let mut worst = f64::INFINITY;
    for s in ds.samples() {
        model.logits_into(&s.features, &mut z);
        let other = z
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != s.label)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.min(z[s.label] - other);
    }
    Ok(worst)
}

/// Confusion averages `u_{i,j} = (1/N) sum_{x in S_j} u_i(x)` as a `k x k`
/// matrix indexed `(i, j)`.
pub fn confusion<C: Classifier + ?Sized>(model: &C, ds: &Dataset) -> Result<Matrix> {
    check_dataset(model, ds)?;
    let k = ds.k();
    let mut z = vec![0.0; k];
    let mut u = vec![0.0; k];
    let mut out = Matrix::zeros(k, k);
    for s in ds.samples() {
        model.logits_into(&s.features, &mut z);
        softmax_into(&z, &mut u)?;
        for i in 0..k {
            out[(i, s.label)] += u[i];
        }
    }
    out.scale(1.0 / ds.len() as f64);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_logits_give_uniform() {
        let p = softmax(&Logits(vec![0.7; 4])).unwrap();
        for v in p.0 {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let p = softmax(&Logits(vec![1000.0, 0.0])).unwrap();
        assert_eq!(p.0[0], 1.0);
        assert!(p.0[1] >= 0.0 && p.0[1] < 1e-300);
    }

    #[test]
    fn non_finite_logits_are_rejected() {
        assert_eq!(
            softmax(&Logits(vec![1.0, f64::NAN])),
            Err(Error::NonFinite("logits"))
        );
        assert!(softmax(&Logits(vec![f64::INFINITY, 0.0])).is_err());
    }

    #[test]
    fn softmax_of_one_two_three() {
        // mpmath at 50 digits: exp(i) / (e + e^2 + e^3)
        let expected = [
            0.090_030_573_170_380_46,
            0.244_728_471_054_797_64,
            0.665_240_955_774_821_9,
        ];
        let p = softmax(&Logits(vec![1.0, 2.0, 3.0])).unwrap();
        for (a, b) in p.0.iter().zip(expected) {
            assert!((a - b).abs() <= 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn cross_entropy_at_zero_logits_is_log_k() {
        assert!((cross_entropy(&[0.0; 5], 2) - libm::log(5.0)).abs() < 1e-15);
    }
}
