#![allow(dead_code)]

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rollcast::features::{make_windows, WindowedDataset};
use rollcast::neural::{Activation, HeadSpec, LayerSpec, Network, NetworkSpec, RecurrentKind};
use rollcast::rpa::Predictor;
use rollcast::{Matrix, Result};

pub const FD_STEP: f64 = 1e-5;
pub const GRAD_TOL: f64 = 1e-4;
pub const GRAD_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Dense,
    Recurrent,
}

pub const HEADS: [Head; 2] = [Head::Dense, Head::Recurrent];

/// One recurrent layer of 3 units over 4 steps, 2 features in and out.
pub fn small_spec(kind: RecurrentKind, head: Head) -> NetworkSpec {
    NetworkSpec {
        input_features: 2,
        input_steps: 4,
        output_steps: 2,
        output_features: 2,
        layers: vec![LayerSpec {
            cell: kind.cell(),
            hidden: 3,
            bidirectional: kind == RecurrentKind::Bilstm,
            activation: Activation::Relu,
        }],
        head: match head {
            Head::Dense => HeadSpec::Dense,
            Head::Recurrent => HeadSpec::Recurrent { cell: kind.cell() },
        },
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// A network with every parameter drawn uniformly, plus a random batch.
pub fn random_problem(spec: NetworkSpec, seed: u64) -> (Network, Vec<Matrix>, Vec<Matrix>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::zeros(spec.clone()).unwrap();
    let params = (0..net.param_count()).map(|_| rng.random_range(-0.8..0.8)).collect();
    net.set_params(params).unwrap();
    let inputs = (0..3)
        .map(|_| random_matrix(&mut rng, spec.input_steps, spec.input_features, -1.0, 1.0))
        .collect();
    let targets = (0..3)
        .map(|_| random_matrix(&mut rng, spec.output_steps, spec.output_features, 0.0, 1.0))
        .collect();
    (net, inputs, targets)
}

/// Central-difference gradient of the loss, one coordinate at a time.
pub fn numeric_gradient(net: &Network, inputs: &[Matrix], targets: &[Matrix], h: f64) -> Vec<f64> {
    let base = net.params().to_vec();
    let mut probe = net.clone();
    (0..base.len())
        .map(|i| {
            let mut p = base.clone();
            p[i] = base[i] + h;
            probe.set_params(p.clone()).unwrap();
            let up = probe.loss(inputs, targets).unwrap();
            p[i] = base[i] - h;
            probe.set_params(p).unwrap();
            let down = probe.loss(inputs, targets).unwrap();
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Largest relative error between backprop and finite differences.
pub fn gradient_check(kind: RecurrentKind, head: Head, seed: u64) -> f64 {
    let (net, inputs, targets) = random_problem(small_spec(kind, head), seed);
    let (_, analytic) = net.backward(&inputs, &targets, &HashSet::new()).unwrap();
    let numeric = numeric_gradient(&net, &inputs, &targets, FD_STEP);
    analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| relative_error(*a, *n))
        .fold(0.0, f64::max)
}

/// Deterministic toy unit: each output row mixes the first and last input
/// rows and adds the row index.
pub struct ToyUnit {
    pub p: usize,
    pub q: usize,
    pub features: usize,
}

impl ToyUnit {
    pub fn apply(&self, window: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..self.q)
            .map(|j| {
                (0..self.features)
                    .map(|f| 0.5 * window[self.p - 1][f] + 0.25 * window[0][f] + (j + 1) as f64)
                    .collect()
            })
            .collect()
    }
}

impl Predictor for ToyUnit {
    fn input_steps(&self) -> usize {
        self.p
    }
    fn output_steps(&self) -> usize {
        self.q
    }
    fn features(&self) -> usize {
        self.features
    }
    fn predict(&self, window: &Matrix) -> Result<Matrix> {
        let rows: Vec<Vec<f64>> = window.iter_rows().map(|r| r.to_vec()).collect();
        Matrix::from_rows(&self.apply(&rows))
    }
}

/// Rolling forecast by extending one timeline: every input window is the
/// last `p` rows of (seed ++ forecast so far), and each call appends the
/// first `p − l` predicted rows.
pub fn brute_force_rolling(unit: &ToyUnit, seed: &[Vec<f64>], l: usize, horizon: usize) -> Vec<Vec<f64>> {
    let p = unit.p;
    let mut timeline: Vec<Vec<f64>> = seed.to_vec();
    let mut forecast = Vec::new();
    while forecast.len() < horizon {
        let window = timeline[timeline.len() - p..].to_vec();
        let out = unit.apply(&window);
        for row in out.into_iter().take(p - l) {
            timeline.push(row.clone());
            forecast.push(row);
        }
    }
    forecast.truncate(horizon);
    forecast
}

/// `y_t = phi * y_{t-1} + e_t`, `e_t ~ N(0, sigma²)`, after a burn-in.
pub fn ar1_series(phi: f64, sigma: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut y = 0.0;
    let mut out = Vec::with_capacity(n);
    for t in 0..n + 100 {
        y = phi * y + noise.sample(&mut rng);
        if t >= 100 {
            out.push(y);
        }
    }
    out
}

pub fn white_noise(mean: f64, sigma: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(mean, sigma).unwrap();
    (0..n).map(|_| noise.sample(&mut rng)).collect()
}

/// Noise-free sine over `n` points, `p → 1` windows.
pub fn sine_windows(n: usize, p: usize) -> WindowedDataset {
    let values: Vec<f64> = (0..n).map(|t| (2.0 * std::f64::consts::PI * t as f64 / 25.0).sin()).collect();
    make_windows(&Matrix::column(&values), p, 1).unwrap()
}
