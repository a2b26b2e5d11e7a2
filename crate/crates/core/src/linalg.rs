//! Small dense row-major matrices and the handful of kernels the models need.

use alloc::vec;
use alloc::vec::Vec;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        ensure_len("matrix data", rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            ensure_len("matrix row", cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// `self -= step * other`, elementwise.
    pub fn sub_scaled(&mut self, other: &Matrix, step: f64) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a -= step * b;
        }
    }

    /// `(1 - alpha) * a + alpha * b`, elementwise.
    pub fn lerp(a: &Matrix, b: &Matrix, alpha: f64) -> Result<Matrix> {
        ensure_len("interpolated matrix rows", a.rows, b.rows)?;
        ensure_len("interpolated matrix cols", a.cols, b.cols)?;
        Ok(Matrix {
            rows: a.rows,
            cols: a.cols,
            data: lerp_slice(&a.data, &b.data, alpha),
        })
    }

    /// `out = self * x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        ensure_len("matrix-vector operand", self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// `out = self^T * y`.
    pub fn matvec_t_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), out);
            }
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        ensure_len("matrix product inner dimension", self.cols, other.rows)?;
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let row = self.row(i);
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (p, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    axpy(a, other.row(p), dst);
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Inner product with a fixed four-lane accumulation order, so results are
/// bit-stable across runs.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let split = n - n % 4;
    let mut acc = [0.0f64; 4];
    for (ca, cb) in a[..split].chunks_exact(4).zip(b[..split].chunks_exact(4)) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for i in split..n {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += a * x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn lerp_slice(a: &[f64], b: &[f64], alpha: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| (1.0 - alpha) * x + alpha * y)
        .collect()
}

/// Integer power by repeated multiplication; sign-correct for negative bases.
pub fn powi(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Result of power iteration on `V^T V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerIteration {
    pub norm: f64,
    pub iterations: usize,
    /// `||V^T V v - lambda v|| / lambda` at the returned iterate.
    pub residual: f64,
    pub converged: bool,
}

/// Operator 2-norm by power iteration on `V^T V`, from a start vector drawn
/// from a fixed seeded stream.
pub fn spectral_norm(v: &Matrix, tol: f64, max_iter: usize) -> Result<PowerIteration> {
    if !(tol > 0.0) {
        return Err(Error::Config("power-iteration tolerance must be > 0".into()));
    }
    let n = v.cols();
    if n == 0 || v.rows() == 0 || v.max_abs() == 0.0 {
        return Ok(PowerIteration {
            norm: 0.0,
            iterations: 0,
            residual: 0.0,
            converged: true,
        });
    }
    let mut rng = rng::stream(0x005e_ed0f_9a11, Stream::PowerIteration);
    let mut x: Vec<f64> = (0..n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g
        })
        .collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|e| *e /= nx);

    let mut vx = vec![0.0; v.rows()];
    let mut y = vec![0.0; n];
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        v.matvec_into(&x, &mut vx);
        v.matvec_t_into(&vx, &mut y);
        lambda = dot(&x, &y);
        if lambda <= 0.0 {
            // x is (numerically) in the null space; restart along a basis vector
            x.iter_mut().for_each(|e| *e = 0.0);
            x[iterations % n] = 1.0;
            continue;
        }
        let mut r2 = 0.0;
        for (yi, xi) in y.iter().zip(&x) {
            let d = yi - lambda * xi;
            r2 += d * d;
        }
        residual = libm::sqrt(r2) / lambda;
        let ny = norm(&y);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
        if residual <= tol {
            break;
        }
    }
    // Rayleigh quotient at the final normalized iterate
    v.matvec_into(&x, &mut vx);
    let final_lambda = dot(&vx, &vx);
    let lambda = if final_lambda.is_finite() {
        final_lambda
    } else {
        lambda
    };
    Ok(PowerIteration {
        norm: libm::sqrt(lambda.max(0.0)),
        iterations,
        residual,
        converged: residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive_sum() {
        let a: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..11).map(|i| 1.0 - i as f64).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }

    #[test]
    fn powi_is_sign_correct() {
        assert_eq!(powi(-2.0, 3), -8.0);
        assert_eq!(powi(-2.0, 4), 16.0);
        assert_eq!(powi(0.5, 0), 1.0);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, -4.0]]).unwrap();
        let p = spectral_norm(&m, 1e-13, 10_000).unwrap();
        assert!((p.norm - 4.0).abs() < 1e-9, "{p:?}");
        assert!(p.converged);
    }

    #[test]
    fn spectral_norm_of_rank_one() {
        // u = (2, 0, 0), v = (3, 4, 0): ||u|| = 2, ||v|| = 5
        let u = [2.0, 0.0, 0.0];
        let v = [3.0, 4.0, 0.0];
        let mut m = Matrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = u[i] * v[j];
            }
        }
        let p = spectral_norm(&m, 1e-13, 10_000).unwrap();
        assert!((p.norm - 10.0).abs() < 1e-9, "{p:?}");
    }

    #[test]
    fn spectral_norm_rejects_bad_tolerance() {
        assert!(spectral_norm(&Matrix::identity(2), 0.0, 10).is_err());
    }

    #[test]
    fn zero_matrix_has_zero_norm() {
        let p = spectral_norm(&Matrix::zeros(3, 2), 1e-12, 10).unwrap();
        assert_eq!(p.norm, 0.0);
    }
}
