//! Two toy objectives whose interpolation curves say nothing about how hard
//! they are to optimize.
//!
//! The hard objective `f(x, z) = -T(x, x, x) + |x|^4 + z^4` is built on a
//! symmetric 3-tensor given in low-rank form; its path from `(0, z0)` to the
//! minimizer is convex and decreasing. The easy objective
//! `f(x, y) = (1 - y / (3 rho)) (rho^4 - 2 rho^2)` has gradient descent
//! converging to `(0, -1)` but a bump along straight paths toward it.
//!
//! Angle convention for the easy objective: `x = rho cos(theta)`,
//! `y = rho sin(theta)`, so `f = (1 - sin(theta)/3) (rho^4 - 2 rho^2)` and
//! `(0, 1)` has `sin(theta) = 1`. Starting points `(rho sin(beta), rho cos(beta))`
//! correspond to `theta = pi/2 - beta`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_3;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{dot, norm};

/// `T = sum_i w_i v_i (x) v_i (x) v_i` with unit vectors `v_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTensor3 {
    dim: usize,
    factors: Vec<(f64, Vec<f64>)>,
}

impl SymTensor3 {
    pub fn new(dim: usize, factors: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        for (w, v) in &factors {
            ensure_len("tensor factor", dim, v.len())?;
            if !w.is_finite() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("tensor factor"));
            }
            if (norm(v) - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "tensor factors must be unit vectors, got norm {}",
                    norm(v)
                )));
            }
        }
        Ok(Self { dim, factors })
    }

    /// `e_axis (x) e_axis (x) e_axis`.
    pub fn rank_one_basis(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::shape("basis axis", dim, axis));
        }
        let mut v = alloc::vec![0.0; dim];
        v[axis] = 1.0;
        Self::new(dim, alloc::vec![(1.0, v)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[(f64, Vec<f64>)] {
        &self.factors
    }

    /// `T(x, x, x) = sum_i w_i <v_i, x>^3`.
    pub fn contract(&self, x: &[f64]) -> Result<f64> {
        ensure_len("tensor argument", self.dim, x.len())?;
        Ok(self
            .factors
            .iter()
            .map(|(w, v)| {
                let p = dot(v, x);
                w * p * p * p
            })
            .sum())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardPoint {
    pub x: Vec<f64>,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EasyPoint {
    pub x: f64,
    pub y: f64,
}

impl EasyPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

pub fn hard_eval(t: &SymTensor3, p: &HardPoint) -> Result<f64> {
    if !p.z.is_finite() || p.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("hard point"));
    }
    let n2 = dot(&p.x, &p.x);
    let z2 = p.z * p.z;
    Ok(-t.contract(&p.x)? + n2 * n2 + z2 * z2)
}

/// Smallest `|z0|` for which the path from `(0, z0)` is convex and decreasing.
pub const HARD_Z0_THRESHOLD: f64 = 1.060_660_171_779_821_2; // 3 sqrt(2) / 4

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardCurve {
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    /// `values[i + 1] - values[i]`.
    pub first_differences: Vec<f64>,
    /// Central second differences at interior grid points, divided by `h^2`.
    pub second_differences: Vec<f64>,
}

impl HardCurve {
    pub fn is_convex(&self) -> bool {
        self.second_differences.iter().all(|&d| d > 0.0)
    }

    pub fn is_decreasing(&self) -> bool {
        self.first_differences.iter().all(|&d| d < 0.0)
    }
}

/// Samples `gamma(a) = f(a x*, (1 - a) z0)` on `n` evenly spaced points.
pub fn hard_curve(t: &SymTensor3, z0: f64, xstar: &[f64], n: usize) -> Result<HardCurve> {
    if !(z0.abs() > HARD_Z0_THRESHOLD) {
        return Err(Error::Hypothesis(format!(
            "|z0| must exceed 3*sqrt(2)/4 = {HARD_Z0_THRESHOLD:.6}, got {z0}"
        )));
    }
    ensure_len("minimizer point", t.dim(), xstar.len())?;
    if n < 3 {
        return Err(Error::Config(format!("curve needs at least 3 points, got {n}")));
    }
    let m = (n - 1) as f64;
    let alphas: Vec<f64> = (0..n).map(|i| i as f64 / m).collect();
    let values = alphas
        .iter()
        .map(|&a| {
            let p = HardPoint {
                x: xstar.iter().map(|v| a * v).collect(),
                z: (1.0 - a) * z0,
            };
            hard_eval(t, &p)
        })
        .collect::<Result<Vec<f64>>>()?;
    let first_differences = values.windows(2).map(|w| w[1] - w[0]).collect();
    let h2 = (1.0 / m) * (1.0 / m);
    let second_differences = values
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]) / h2)
        .collect();
    Ok(HardCurve {
        alphas,
        values,
        first_differences,
        second_differences,
    })
}

/// `-a^3 p + a^4 |x*|^4 + (1 - a)^4 z0^4` with `p = T(x*, x*, x*)`.
pub fn hard_closed_form(p: f64, xstar_norm: f64, z0: f64, alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    let n2 = xstar_norm * xstar_norm;
    let b = 1.0 - alpha;
    let b2 = b * b;
    let z2 = z0 * z0;
    -a2 * alpha * p + a2 * a2 * n2 * n2 + b2 * b2 * z2 * z2
}

fn radius(p: EasyPoint) -> f64 {
    libm::hypot(p.x, p.y)
}

pub fn easy_eval(p: EasyPoint) -> f64 {
    if p.x == 0.0 && p.y == 0.0 {
        return 0.0;
    }
    let rho = radius(p);
    let rho2 = rho * rho;
    (1.0 - p.y / (3.0 * rho)) * (rho2 * rho2 - 2.0 * rho2)
}

/// Cartesian gradient assembled from the polar partials
/// `h_rho = (1 - s/3)(4 rho^3 - 4 rho)` and `h_theta = -(c/3)(rho^4 - 2 rho^2)`.
pub fn easy_grad(p: EasyPoint) -> Result<[f64; 2]> {
    if p.x == 0.0 && p.y == 0.0 {
        return Err(Error::NonDifferentiable { x: p.x, y: p.y });
    }
    let rho = radius(p);
    let (c, s) = (p.x / rho, p.y / rho);
    let rho2 = rho * rho;
    let h_rho = (1.0 - s / 3.0) * (4.0 * rho2 * rho - 4.0 * rho);
    let h_theta_over_rho = -(c / 3.0) * (rho2 * rho - 2.0 * rho);
    Ok([h_rho * c - h_theta_over_rho * s, h_rho * s + h_theta_over_rho * c])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentStep {
    pub iter: usize,
    pub x: f64,
    pub y: f64,
    pub f: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descent {
    /// Every `record_stride`-th iterate plus the last one.
    pub path: Vec<DescentStep>,
    pub last: EasyPoint,
    pub iterations: usize,
    pub converged: bool,
}

/// Plain gradient descent; converged once the gradient norm is at most `tol`.
pub fn easy_descend(
    start: EasyPoint,
    step: f64,
    max_iters: usize,
    tol: f64,
    record_stride: usize,
) -> Result<Descent> {
    if !(step > 0.0) || !(tol >= 0.0) || record_stride == 0 {
        return Err(Error::Config(
            "descent needs step > 0, tol >= 0 and record_stride >= 1".into(),
        ));
    }
    let mut p = start;
    let mut path = Vec::new();
    let mut iter = 0;
    loop {
        let g = easy_grad(p)?;
        let gn = libm::hypot(g[0], g[1]);
        let converged = gn <= tol;
        let done = converged || iter == max_iters;
        if iter % record_stride == 0 || done {
            path.push(DescentStep {
                iter,
                x: p.x,
                y: p.y,
                f: easy_eval(p),
                grad_norm: gn,
            });
        }
        if done {
            return Ok(Descent {
                path,
                last: p,
                iterations: iter,
                converged,
            });
        }
        p = EasyPoint::new(p.x - step * g[0], p.y - step * g[1]);
        iter += 1;
    }
}

/// `f(midpoint) - f(start)` on the segment from `(rho0 sin b, rho0 cos b)` to
/// `(0, -1)`.
pub fn easy_bump(beta: f64, rho0: f64) -> Result<f64> {
    if !(beta.abs() <= FRAC_PI_3 * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "beta must lie in [-pi/3, pi/3], got {beta}"
        )));
    }
    if !(rho0 >= 1.0) || !rho0.is_finite() {
        return Err(Error::Config(format!("rho0 must be >= 1, got {rho0}")));
    }
    let start = EasyPoint::new(rho0 * libm::sin(beta), rho0 * libm::cos(beta));
    let mid = EasyPoint::new(0.5 * start.x, 0.5 * (start.y - 1.0));
    Ok(easy_eval(mid) - easy_eval(start))
}

/// Lower bound on the bump for `rho0 = 1`.
pub const EASY_BUMP_BOUND: f64 = 5.0 / 32.0;
