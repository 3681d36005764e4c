//! Small feed-forward regressor (input → 200 → 100 → 40 → 1, ReLU hidden
//! layers, linear output) trained with mini-batch Adam on mean squared
//! error. Hand-rolled on purpose: the model is tiny, and keeping the loop
//! explicit makes determinism and early stopping easy to pin down.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

pub const HIDDEN_DIMS: [usize; 3] = [200, 100, 40];
pub const BATCH_SIZE: usize = 128;
pub const LEARNING_RATE: f32 = 1e-3;
pub const EARLY_STOP_PATIENCE: usize = 10;

const ADAM_BETA1: f32 = 0.9;
const ADAM_BETA2: f32 = 0.999;
const ADAM_EPS: f32 = 1e-8;

/// One dense layer, row-major weights (`out × in`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f32>,
    pub b: Vec<f32>,
}

impl DenseLayer {
    fn he_init(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let std = (2.0 / in_dim as f64).sqrt();
        let normal = Normal::new(0.0, std).expect("finite std");
        Self {
            in_dim,
            out_dim,
            w: (0..in_dim * out_dim).map(|_| normal.sample(rng) as f32).collect(),
            b: vec![0.0; out_dim],
        }
    }

    fn forward(&self, x: &[f32], out: &mut Vec<f32>, relu: bool) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.b[o];
            for (wi, xi) in row.iter().zip(x) {
                acc += wi * xi;
            }
            out.push(if relu { acc.max(0.0) } else { acc });
        }
    }
}

/// Scalar-output multilayer perceptron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regressor {
    pub layers: Vec<DenseLayer>,
}

impl Regressor {
    pub fn new(input_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dims = vec![input_dim];
        dims.extend_from_slice(&HIDDEN_DIMS);
        dims.push(1);
        let layers = dims
            .windows(2)
            .map(|d| DenseLayer::he_init(d[0], d[1], &mut rng))
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Single forward pass; hidden activations are ReLU, output is linear.
    pub fn predict(&self, x: &[f32]) -> f32 {
        debug_assert_eq!(x.len(), self.input_dim());
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.forward(&cur, &mut next, i < last);
            std::mem::swap(&mut cur, &mut next);
        }
        cur[0]
    }
}

/// Per-epoch progress and the early-stopping outcome of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub best_epoch: usize,
    /// MAE of the returned (best-epoch) weights on the training split, dB.
    pub train_mae_db: f64,
    /// MAE of the returned weights on the validation split, dB; equals the
    /// training figure when no validation rows exist.
    pub val_mae_db: f64,
    /// Training-split MAE observed after the first epoch, dB.
    pub first_epoch_train_mae_db: f64,
}

struct AdamState {
    m: Vec<Vec<f32>>,
    v: Vec<Vec<f32>>,
    t: i32,
}

/// Trains on standardized inputs/labels. `label_std_db` converts the
/// standardized MAE back to dB for reporting. Deterministic for a fixed
/// (data, seed) pair. Early-stops when the monitored MAE (validation when
/// present, else training) fails to improve for
/// [`EARLY_STOP_PATIENCE`] consecutive epochs; the best-epoch weights are
/// restored before returning.
pub fn train(
    inputs: &[Vec<f32>],
    labels_std: &[f32],
    train_idx: &[usize],
    val_idx: &[usize],
    label_std_db: f64,
    max_epochs: usize,
    seed: u64,
) -> (Regressor, TrainReport) {
    assert!(!train_idx.is_empty(), "empty training split");
    assert_eq!(inputs.len(), labels_std.len());
    let input_dim = inputs[0].len();
    let mut net = Regressor::new(input_dim, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);

    let mut adam: Vec<AdamState> = net
        .layers
        .iter()
        .map(|l| AdamState {
            m: vec![vec![0.0; l.w.len()], vec![0.0; l.b.len()]],
            v: vec![vec![0.0; l.w.len()], vec![0.0; l.b.len()]],
            t: 0,
        })
        .collect();

    let mae = |net: &Regressor, idx: &[usize]| -> f64 {
        if idx.is_empty() {
            return f64::NAN;
        }
        let sum: f64 = idx
            .iter()
            .map(|&i| (net.predict(&inputs[i]) - labels_std[i]).abs() as f64)
            .sum();
        sum / idx.len() as f64 * label_std_db
    };

    let mut order: Vec<usize> = train_idx.to_vec();
    let mut best_weights = net.layers.clone();
    let mut best_monitor = f64::INFINITY;
    let mut best_epoch = 0;
    let mut stale = 0usize;
    let mut epochs_run = 0;
    let mut first_epoch_train_mae = f64::NAN;

    // forward activations and gradient scratch, reused across samples
    let n_layers = net.layers.len();
    let mut acts: Vec<Vec<f32>> = Vec::with_capacity(n_layers + 1);
    for _ in 0..=n_layers {
        acts.push(Vec::new());
    }

    for epoch in 0..max_epochs {
        epochs_run = epoch + 1;
        order.shuffle(&mut rng);
        for batch in order.chunks(BATCH_SIZE) {
            let mut grads: Vec<(Vec<f32>, Vec<f32>)> = net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()]))
                .collect();
            for &row in batch {
                // forward, keeping every activation
                acts[0].clear();
                acts[0].extend_from_slice(&inputs[row]);
                for (li, layer) in net.layers.iter().enumerate() {
                    let (prev, rest) = acts.split_at_mut(li + 1);
                    layer.forward(&prev[li], &mut rest[0], li < n_layers - 1);
                }
                // backward: d(MSE)/d(pred) = 2·(pred − y) / batch
                let pred = acts[n_layers][0];
                let mut delta = vec![2.0 * (pred - labels_std[row]) / batch.len() as f32];
                for li in (0..n_layers).rev() {
                    let layer = &net.layers[li];
                    let input = &acts[li];
                    let (gw, gb) = &mut grads[li];
                    let mut prev_delta = vec![0.0f32; layer.in_dim];
                    for o in 0..layer.out_dim {
                        let d = delta[o];
                        if d == 0.0 {
                            continue;
                        }
                        gb[o] += d;
                        let wrow = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                        for i in 0..layer.in_dim {
                            gw[o * layer.in_dim + i] += d * input[i];
                            prev_delta[i] += d * wrow[i];
                        }
                    }
                    if li > 0 {
                        // ReLU derivative of the previous layer's output
                        for (pd, &a) in prev_delta.iter_mut().zip(acts[li].iter()) {
                            if a <= 0.0 {
                                *pd = 0.0;
                            }
                        }
                    }
                    delta = prev_delta;
                }
            }
            // Adam step per layer
            for (li, layer) in net.layers.iter_mut().enumerate() {
                let state = &mut adam[li];
                state.t += 1;
                let bc1 = 1.0 - ADAM_BETA1.powi(state.t);
                let bc2 = 1.0 - ADAM_BETA2.powi(state.t);
                let (gw, gb) = &grads[li];
                let (m_w, m_b) = state.m.split_at_mut(1);
                let (v_w, v_b) = state.v.split_at_mut(1);
                for (params, grad, m, v) in [
                    (&mut layer.w, gw, &mut m_w[0], &mut v_w[0]),
                    (&mut layer.b, gb, &mut m_b[0], &mut v_b[0]),
                ] {
                    for i in 0..params.len() {
                        let g = grad[i];
                        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g;
                        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g * g;
                        let m_hat = m[i] / bc1;
                        let v_hat = v[i] / bc2;
                        params[i] -= LEARNING_RATE * m_hat / (v_hat.sqrt() + ADAM_EPS);
                    }
                }
            }
        }

        let train_mae = mae(&net, train_idx);
        if epoch == 0 {
            first_epoch_train_mae = train_mae;
        }
        let monitor = if val_idx.is_empty() { train_mae } else { mae(&net, val_idx) };
        if monitor + 1e-12 < best_monitor {
            best_monitor = monitor;
            best_epoch = epoch + 1;
            best_weights = net.layers.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= EARLY_STOP_PATIENCE {
                break;
            }
        }
    }

    net.layers = best_weights;
    let train_mae_db = mae(&net, train_idx);
    let val_mae_db = if val_idx.is_empty() { train_mae_db } else { mae(&net, val_idx) };
    (
        net,
        TrainReport {
            epochs_run,
            best_epoch,
            train_mae_db,
            val_mae_db,
            first_epoch_train_mae_db: first_epoch_train_mae,
        },
    )
}
