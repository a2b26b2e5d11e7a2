//! Analytic gradients against central finite differences.

use plateau_core::mlpnet::{mlp_init, Activation, BiasMode, MlpNet};
use plateau_core::synthdata::{generate_dataset, DatasetConfig};
use plateau_core::{Dataset, HomoNet, Matrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const H: f64 = 1e-5;
const REL: f64 = 1e-6;

/// Relative error with a floor so that components that are zero up to
/// rounding are compared on the scale of the whole gradient.
fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3 * scale).max(1e-12)
}

fn tiny_dataset(rng: &mut StdRng) -> Dataset {
    let k = rng.random_range(2..=4);
    let per = rng.random_range(1..=3);
    let dim = k + rng.random_range(0..=3);
    generate_dataset(&DatasetConfig {
        k,
        n_total: k * per,
        dim,
        noise_sigma: 0.3,
        seed: rng.random(),
    })
    .unwrap()
}

fn random_homo(rng: &mut StdRng, k: usize, d: usize) -> HomoNet {
    let r = rng.random_range(3..=5);
    let w: Vec<f64> = (0..k * d).map(|_| rng.random_range(-0.9..0.9)).collect();
    let b: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    HomoNet::new(Matrix::from_vec(k, d, w).unwrap(), b, r).unwrap()
}

fn scaled_loss(net: &HomoNet, ds: &Dataset) -> f64 {
    ds.k() as f64 * net.mean_loss(ds).unwrap()
}

#[test]
fn homo_gradient_matches_central_differences() {
    let mut rng = StdRng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let ds = tiny_dataset(&mut rng);
        let net = random_homo(&mut rng, ds.k(), ds.dim());
        let g = net.grad(&ds).unwrap();
        let scale =
            g.dw.as_slice()
                .iter()
                .chain(&g.db)
                .fold(0.0f64, |m, v| m.max(v.abs()));
        for idx in 0..g.dw.as_slice().len() {
            let mut plus = net.weights().clone();
            let mut minus = net.weights().clone();
            plus.as_mut_slice()[idx] += H;
            minus.as_mut_slice()[idx] -= H;
            let lp = scaled_loss(
                &HomoNet::new(plus, net.biases().to_vec(), net.degree()).unwrap(),
                &ds,
            );
            let lm = scaled_loss(
                &HomoNet::new(minus, net.biases().to_vec(), net.degree()).unwrap(),
                &ds,
            );
            let fd = (lp - lm) / (2.0 * H);
            worst = worst.max(rel_err(g.dw.as_slice()[idx], fd, scale));
        }
        for i in 0..ds.k() {
            let mut bp = net.biases().to_vec();
            let mut bm = net.biases().to_vec();
            bp[i] += H;
            bm[i] -= H;
            let lp = scaled_loss(
                &HomoNet::new(net.weights().clone(), bp, net.degree()).unwrap(),
                &ds,
            );
            let lm = scaled_loss(
                &HomoNet::new(net.weights().clone(), bm, net.degree()).unwrap(),
                &ds,
            );
            worst = worst.max(rel_err(g.db[i], (lp - lm) / (2.0 * H), scale));
        }
        assert!(g.db.iter().sum::<f64>().abs() < 1e-12);
    }
    assert!(worst <= REL, "worst relative error {worst:e}");
}

fn perturbed(net: &MlpNet, layer: usize, idx: usize, bias: bool, h: f64) -> MlpNet {
    let mut layers = net.layers().to_vec();
    let mut biases = net.biases().to_vec();
    if bias {
        biases[layer][idx] += h;
    } else {
        layers[layer].as_mut_slice()[idx] += h;
    }
    MlpNet::new(layers, biases, net.activation(), net.bias_mode()).unwrap()
}

#[test]
fn mlp_gradient_matches_central_differences() {
    let mut rng = StdRng::seed_from_u64(21);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let ds = tiny_dataset(&mut rng);
        let depth = rng.random_range(1..=4);
        let mut widths = vec![ds.dim()];
        for _ in 1..depth {
            widths.push(rng.random_range(2..=5));
        }
        widths.push(ds.k());
        let activation = if case % 2 == 0 {
            Activation::Relu
        } else {
            Activation::Identity
        };
        let mode = [BiasMode::All, BiasMode::Last, BiasMode::None][case % 3];
        let base = mlp_init(&widths, activation, mode, rng.random(), 1.0).unwrap();
        // nonzero biases so their gradients are exercised
        let biases: Vec<Vec<f64>> = base
            .biases()
            .iter()
            .map(|b| b.iter().map(|_| rng.random_range(-0.5..0.5)).collect())
            .collect();
        let net = MlpNet::new(base.layers().to_vec(), biases, activation, mode).unwrap();
        let (_, g) = net.loss_grad(&ds).unwrap();
        if mode == BiasMode::None {
            assert_eq!(g.bias_len(), 0);
        }
        let scale = g
            .layers
            .iter()
            .flat_map(|m| m.as_slice().iter())
            .chain(g.biases.iter().flatten())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let loss = |m: &MlpNet| m.loss_grad(&ds).unwrap().0;
        for (l, gl) in g.layers.iter().enumerate() {
            for idx in 0..gl.as_slice().len() {
                let fd = (loss(&perturbed(&net, l, idx, false, H))
                    - loss(&perturbed(&net, l, idx, false, -H)))
                    / (2.0 * H);
                worst = worst.max(rel_err(gl.as_slice()[idx], fd, scale));
            }
        }
        for (l, gb) in g.biases.iter().enumerate() {
            for (idx, &a) in gb.iter().enumerate() {
                let fd = (loss(&perturbed(&net, l, idx, true, H)) - loss(&perturbed(&net, l, idx, true, -H)))
                    / (2.0 * H);
                worst = worst.max(rel_err(a, fd, scale));
            }
        }
    }
    assert!(worst <= REL, "worst relative error {worst:e}");
}

#[test]
fn zero_output_mlp_has_log_k_loss() {
    let net = MlpNet::new(
        vec![Matrix::zeros(3, 4), Matrix::zeros(3, 3)],
        vec![vec![], vec![0.0; 3]],
        Activation::Relu,
        BiasMode::Last,
    )
    .unwrap();
    let ds = generate_dataset(&DatasetConfig {
        k: 3,
        n_total: 6,
        dim: 4,
        noise_sigma: 0.2,
        seed: 3,
    })
    .unwrap();
    let (loss, _) = net.loss_grad(&ds).unwrap();
    assert!((loss - 3f64.ln()).abs() < 1e-12);
}
