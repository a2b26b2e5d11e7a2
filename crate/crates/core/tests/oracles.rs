//! Independent oracles: exact rational arithmetic, dense linear algebra,
//! Monte-Carlo estimates and frozen high-precision values.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use plateau_core::bounds::{alpha_bounds_fcn, TrainedStats};
use plateau_core::counterexamples::{
    easy_bump, easy_descend, easy_eval, easy_grad, hard_closed_form, hard_curve, hard_eval, EasyPoint,
    HardPoint, SymTensor3, EASY_BUMP_BOUND,
};
use plateau_core::linalg::spectral_norm;
use plateau_core::mlpnet::{mlp_init, Activation, BiasMode};
use plateau_core::synthdata::{generate_dataset, init_weights, verify_init, DatasetConfig, Sample};
use plateau_core::{Classifier, Dataset, HomoNet, Matrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{ChiSquared, Distribution, Normal};

fn q(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite")
}

#[test]
fn homo_forward_matches_exact_rationals() {
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..50 {
        let (k, d, r) = (
            rng.random_range(2..5),
            rng.random_range(4..9),
            rng.random_range(3..6),
        );
        let w: Vec<f64> = (0..k * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let net = HomoNet::new(Matrix::from_vec(k, d, w.clone()).unwrap(), b.clone(), r).unwrap();
        let f = net.forward(&x).unwrap();
        for i in 0..k {
            let mut p = BigRational::zero();
            for j in 0..d {
                p += q(w[i * d + j]) * q(x[j]);
            }
            let mut pr = BigRational::from_integer(BigInt::from(1));
            for _ in 0..r {
                pr *= &p;
            }
            let exact = pr + q(b[i]);
            // cancellation between signal and bias can only be judged absolutely
            let scale = exact.abs().to_f64().unwrap().max(1e-3);
            let err = (q(f.0[i]) - &exact).abs().to_f64().unwrap() / scale;
            assert!(err <= 1e-12, "relative error {err:e}");
        }
    }
}

#[test]
fn mlp_forward_matches_exact_rationals() {
    let mut rng = StdRng::seed_from_u64(2);
    for case in 0..20 {
        let act = if case % 2 == 0 {
            Activation::Relu
        } else {
            Activation::Identity
        };
        let base = mlp_init(&[5, 6, 4, 3], act, BiasMode::All, case, 1.0).unwrap();
        let biases: Vec<Vec<f64>> = base
            .biases()
            .iter()
            .map(|b| b.iter().map(|_| rng.random_range(-0.3..0.3)).collect())
            .collect();
        let net =
            plateau_core::MlpNet::new(base.layers().to_vec(), biases.clone(), act, BiasMode::All).unwrap();
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut h: Vec<BigRational> = x.iter().map(|&v| q(v)).collect();
        for (l, v) in net.layers().iter().enumerate() {
            let mut out = Vec::new();
            for i in 0..v.rows() {
                let mut s = q(biases[l][i]);
                for j in 0..v.cols() {
                    s += q(v[(i, j)]) * &h[j];
                }
                if l + 1 < net.depth() && act == Activation::Relu && s.is_negative() {
                    s = BigRational::zero();
                }
                out.push(s);
            }
            h = out;
        }
        let f = net.logits(&x).unwrap();
        for (a, e) in f.0.iter().zip(&h) {
            let scale = e.abs().to_f64().unwrap().max(1e-3);
            assert!((q(*a) - e).abs().to_f64().unwrap() / scale <= 1e-12);
        }
    }
}

fn hand_dataset() -> Dataset {
    let noise = [[0.1, -0.2, 0.05], [-0.05, 0.15, 0.1], [0.2, 0.1, -0.1]];
    let cfg = DatasetConfig {
        k: 3,
        n_total: 3,
        dim: 3,
        noise_sigma: 0.1,
        seed: 0,
    };
    let samples = noise
        .iter()
        .enumerate()
        .map(|(c, n)| Sample::from_noise(c, n.to_vec()))
        .collect();
    Dataset::from_samples(cfg, samples).unwrap()
}

#[test]
fn toy_loss_matches_high_precision_value() {
    // 50-digit mpmath evaluation of the same net and samples
    let expected = 0.577_139_194_859_184;
    let w = Matrix::from_rows(&[vec![0.9, 0.2, 0.1], vec![0.3, 1.1, -0.2], vec![0.05, 0.4, 0.7]]).unwrap();
    let net = HomoNet::new(w, vec![0.25, -0.1, 0.4], 3).unwrap();
    let loss = net.mean_loss(&hand_dataset()).unwrap();
    assert!((loss - expected).abs() <= 1e-14 * expected, "{loss}");
}

#[test]
fn spectral_norm_matches_dense_eigen_oracle() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..10 {
        let data: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = Matrix::from_vec(8, 8, data.clone()).unwrap();
        let dm = DMatrix::from_row_slice(8, 8, &data);
        let eig = (dm.transpose() * &dm).symmetric_eigen();
        let oracle = eig.eigenvalues.max().sqrt();
        let p = spectral_norm(&m, 1e-14, 100_000).unwrap();
        assert!((p.norm - oracle).abs() <= 1e-8, "{} vs {oracle}", p.norm);
    }
}

#[test]
fn noise_energy_matches_chi_square_oracle() {
    let sigma: f64 = 0.05;
    let d = 4096;
    let ds = generate_dataset(&DatasetConfig {
        k: 4,
        n_total: 400,
        dim: d,
        noise_sigma: sigma,
        seed: 1,
    })
    .unwrap();
    let empirical: f64 = ds
        .samples()
        .iter()
        .map(|s| s.noise.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        / ds.len() as f64;
    // |xi|^2 = sigma^2 / d * chi^2_d
    let mut rng = StdRng::seed_from_u64(99);
    let chi = ChiSquared::new(d as f64).unwrap();
    let oracle: f64 = (0..100_000)
        .map(|_| sigma * sigma / d as f64 * chi.sample(&mut rng))
        .sum::<f64>()
        / 100_000.0;
    assert!((empirical - oracle).abs() <= 0.1 * oracle);
    assert!((oracle - sigma * sigma).abs() <= 0.01 * sigma * sigma);
}

#[test]
fn half_normal_mean_matches_monte_carlo() {
    let delta = 0.1;
    let w = init_weights(1, 100_000, delta, 4).unwrap();
    let mean = w.as_slice().iter().sum::<f64>() / 1e5;
    let mut rng = StdRng::seed_from_u64(5);
    let normal = Normal::new(0.0, delta).unwrap();
    let oracle = (0..100_000).map(|_| normal.sample(&mut rng).abs()).sum::<f64>() / 1e5;
    let exact = delta * (2.0 / std::f64::consts::PI).sqrt();
    assert!((mean - exact).abs() <= 0.02 * exact);
    assert!((oracle - exact).abs() <= 0.02 * exact);
}

#[test]
fn pair_correlation_within_gaussian_tail_bound() {
    let (n, d) = (400, 4096);
    let ds = generate_dataset(&DatasetConfig {
        k: 4,
        n_total: n,
        dim: d,
        noise_sigma: 0.05,
        seed: 1,
    })
    .unwrap();
    let w0 = init_weights(4, d, 0.1, 1).unwrap();
    let rep = verify_init(&w0, &ds, 0.1).unwrap();
    let bound = 5.0 * (n as f64).ln().sqrt() / (d as f64).sqrt();

    // independent estimate of the largest pairwise correlation at this (n, d)
    let mut rng = StdRng::seed_from_u64(6);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let vs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| normal.sample(&mut rng)).collect();
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / nv).collect()
        })
        .collect();
    let mut oracle: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            oracle = oracle.max(vs[a].iter().zip(&vs[b]).map(|(x, y)| x * y).sum::<f64>().abs());
        }
    }
    assert!(oracle <= bound);
    assert!(rep.max_pair_corr <= bound, "{} > {bound}", rep.max_pair_corr);
    assert!(rep.max_pair_corr <= 1.5 * oracle);
    assert!(rep.entry_min > 0.0 && rep.noise_norm_max > 0.0);
}

#[test]
fn fcn_bounds_match_independent_formulas() {
    let cases = [
        (0.01, 0.5, 1.0, 3u32, 0.001),
        (0.05, 1.3, 2.2, 6, 0.01),
        (0.2, 0.07, 0.9, 4, 0.5),
    ];
    for (delta, dmin, vmax, r, eps) in cases {
        let stats = TrainedStats {
            delta,
            r,
            bias_sorted: vec![],
            top: 0,
            gaps: vec![],
            delta_min: dmin,
            delta_max: dmin,
            w_diag: vec![],
            w_min: None,
            w_max: None,
            r_min: None,
            r_max: None,
            v_max: Some(vmax),
        };
        let b = alpha_bounds_fcn(&stats, r, eps).unwrap();
        let rf = r as f64;
        let a1 = delta / dmin;
        let a2 = (1.0 / (1.0 + delta.sqrt())).powf(rf / (rf - 1.0))
            * (dmin / (2.0 * vmax.powf(rf))).powf(1.0 / (rf - 1.0));
        let a3 = eps.powf(1.0 / rf) / vmax;
        assert!((b.unclamped.alpha1 - a1).abs() <= 1e-12);
        assert!((b.unclamped.alpha2 - a2).abs() <= 1e-12);
        assert!((b.unclamped.alpha3 - a3).abs() <= 1e-12);
        let limit = (eps.powf(1.0 / rf) / rf)
            .min(1.0 / (rf * rf))
            .min((1.0 / (2.0 * std::f64::consts::E)).powf(2.0 / (rf - 2.0)));
        assert_eq!(b.hypothesis_met, delta < limit);
    }
}

#[test]
fn fcn_alpha2_small_delta_limit() {
    let stats_delta = |delta: f64| {
        let stats = TrainedStats {
            delta,
            r: 3,
            bias_sorted: vec![],
            top: 0,
            gaps: vec![],
            delta_min: 0.5,
            delta_max: 0.5,
            w_diag: vec![],
            w_min: None,
            w_max: None,
            r_min: None,
            r_max: None,
            v_max: Some(1.0),
        };
        alpha_bounds_fcn(&stats, 3, 0.01).unwrap().unclamped.alpha2
    };
    let limit = (0.5f64 / 2.0).sqrt();
    assert!((stats_delta(1e-16) - limit).abs() < 1e-7);
}

fn dense_tensor(t: &SymTensor3) -> Vec<f64> {
    let d = t.dim();
    let mut out = vec![0.0; d * d * d];
    for (w, v) in t.factors() {
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    out[(i * d + j) * d + l] += w * v[i] * v[j] * v[l];
                }
            }
        }
    }
    out
}

#[test]
fn hard_eval_matches_dense_contraction() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..50 {
        let d = rng.random_range(1..=5);
        let rank = rng.random_range(1..=3);
        let factors = (0..rank)
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                (
                    rng.random_range(-2.0..2.0),
                    v.into_iter().map(|x| x / n).collect(),
                )
            })
            .collect();
        let t = SymTensor3::new(d, factors).unwrap();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let z: f64 = rng.random_range(-1.5..1.5);
        let dense = dense_tensor(&t);
        let mut txxx = 0.0;
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    txxx += dense[(i * d + j) * d + l] * x[i] * x[j] * x[l];
                }
            }
        }
        let n2: f64 = x.iter().map(|v| v * v).sum();
        let oracle = -txxx + n2 * n2 + z.powi(4);
        let v = hard_eval(&t, &HardPoint { x, z }).unwrap();
        assert!((v - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
    }
}

#[test]
fn rank_one_minimizer_sits_at_three_quarters() {
    let t = SymTensor3::rank_one_basis(3, 0).unwrap();
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=20_000 {
        let c = i as f64 * 1e-4;
        let v = hard_eval(
            &t,
            &HardPoint {
                x: vec![c, 0.0, 0.0],
                z: 0.0,
            },
        )
        .unwrap();
        if v < best.0 {
            best = (v, c);
        }
    }
    assert!((best.1 - 0.75).abs() <= 1e-3);
    assert!((best.0 + 27.0 / 256.0).abs() <= 1e-12);
}

#[test]
fn hard_curve_matches_closed_form() {
    let t = SymTensor3::rank_one_basis(2, 0).unwrap();
    let xstar = [0.75, 0.0];
    let c = hard_curve(&t, 1.25, &xstar, 1000).unwrap();
    let p = t.contract(&xstar).unwrap();
    for (a, v) in c.alphas.iter().zip(&c.values) {
        let closed = hard_closed_form(p, 0.75, 1.25, *a);
        assert!((v - closed).abs() <= 1e-12);
    }
    assert_eq!(c.values[0], 1.25f64.powi(4));
    assert!((c.values[999] + 27.0 / 256.0).abs() <= 1e-12);
    assert!(c.is_convex() && c.is_decreasing());
}

#[test]
fn easy_polar_form() {
    let mut rng = StdRng::seed_from_u64(8);
    for _ in 0..200 {
        let theta: f64 = rng.random_range(-3.2..3.2);
        let rho: f64 = rng.random_range(0.01..2.5);
        let v = easy_eval(EasyPoint::new(rho * theta.cos(), rho * theta.sin()));
        let h = (1.0 - theta.sin() / 3.0) * (rho.powi(4) - 2.0 * rho * rho);
        assert!((v - h).abs() <= 1e-12 * h.abs().max(1.0));
    }
}

#[test]
fn easy_spot_values_from_the_bump_argument() {
    let s = std::f64::consts::FRAC_PI_6.sin();
    let c = std::f64::consts::FRAC_PI_6.cos();
    let v = easy_eval(EasyPoint::new(s * c, -s * s));
    assert!((v + 49.0 / 96.0).abs() <= 1e-12);
    assert!((easy_eval(EasyPoint::new(0.0, 1.0)) + 2.0 / 3.0).abs() <= 1e-12);
}

#[test]
fn easy_global_minimum_on_grid() {
    let min = -4.0 / 3.0;
    assert_eq!(easy_eval(EasyPoint::new(0.0, -1.0)), min);
    let n = 4001;
    for i in 0..n {
        let x = -2.0 + i as f64 * 1e-3;
        for j in 0..n {
            let y = -2.0 + j as f64 * 1e-3;
            assert!(easy_eval(EasyPoint::new(x, y)) >= min - 1e-15);
        }
    }
}

#[test]
fn easy_gradient_matches_finite_differences() {
    let h = 1e-6;
    let fd = |p: EasyPoint| {
        [
            (easy_eval(EasyPoint::new(p.x + h, p.y)) - easy_eval(EasyPoint::new(p.x - h, p.y))) / (2.0 * h),
            (easy_eval(EasyPoint::new(p.x, p.y + h)) - easy_eval(EasyPoint::new(p.x, p.y - h))) / (2.0 * h),
        ]
    };
    // (0, 1): the radial factor is stationary at rho = 1 and cos(theta) = 0
    let g = easy_grad(EasyPoint::new(0.0, 1.0)).unwrap();
    let f = fd(EasyPoint::new(0.0, 1.0));
    assert!(g[1].abs() <= 1e-12 && (g[0] - f[0]).abs() <= 1e-8 && f[1].abs() <= 1e-8);

    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..100 {
        let p = EasyPoint::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        if p.x.hypot(p.y) < 0.05 {
            continue;
        }
        let g = easy_grad(p).unwrap();
        let f = fd(p);
        let scale = g[0].abs().max(g[1].abs()).max(1e-3);
        for i in 0..2 {
            assert!((g[i] - f[i]).abs() / scale <= 1e-6, "{g:?} vs {f:?} at {p:?}");
        }
    }
}

#[test]
fn easy_descent_reaches_the_global_minimizer() {
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};
    for beta in [-FRAC_PI_3, 1e-6, FRAC_PI_4, FRAC_PI_3] {
        let start = EasyPoint::new(beta.sin(), beta.cos());
        let d = easy_descend(start, 1e-3, 1_000_000, 1e-8, 10_000).unwrap();
        let dist = d.last.x.hypot(d.last.y + 1.0);
        assert!(
            d.converged && dist <= 1e-4,
            "beta {beta}: {:?} after {}",
            d.last,
            d.iterations
        );
    }
}

#[test]
fn descent_on_the_symmetric_ray_stalls_at_the_saddle() {
    // x stays exactly 0, so the radial flow settles at rho = 1
    let d = easy_descend(EasyPoint::new(0.0, 1.0 + 1e-6), 1e-3, 100_000, 1e-10, 1000).unwrap();
    assert_eq!(d.last.x, 0.0);
    assert!((d.last.y - 1.0).abs() < 1e-6);
}

#[test]
fn bump_sweep_respects_the_lower_bound() {
    use std::f64::consts::FRAC_PI_3;
    let min = (0..100)
        .map(|i| easy_bump(-FRAC_PI_3 + 2.0 * FRAC_PI_3 * i as f64 / 99.0, 1.0).unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(min >= EASY_BUMP_BOUND - 1e-9, "min bump {min}");
    assert!((easy_bump(0.0, 1.0).unwrap() - 2.0 / 3.0).abs() <= 1e-12);
    assert!(
        (easy_bump(FRAC_PI_3, 1.0).unwrap()
            - (-49.0 / 96.0 - easy_eval(EasyPoint::new(FRAC_PI_3.sin(), FRAC_PI_3.cos()))))
        .abs()
            <= 1e-12
    );
}
