//! Feed-forward network (tanh hidden layers, linear scalar output) trained by
//! Levenberg–Marquardt on the full-batch sum of squared residuals.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::regress::scaler::MinMaxScaler;

const MAX_RESTARTS: u64 = 5;
const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub max_epochs: usize,
    pub target_mse: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: vec![20, 10],
            max_epochs: 500,
            target_mse: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Row-major `out × in`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// Input width, hidden widths, then 1.
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    pub scaler: MinMaxScaler,
}

/// Per-fit trace of the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmReport {
    pub epochs: usize,
    pub restarts: u64,
    /// Mean squared error after initialization and after each accepted step.
    pub loss_history: Vec<f64>,
    pub final_lambda: f64,
}

impl MlpModel {
    pub fn n_params(&self) -> usize {
        param_count(&self.layer_sizes)
    }

    fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    fn set_params(&mut self, theta: &[f64]) {
        let mut k = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&theta[k..k + nw]);
            k += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&theta[k..k + nb]);
            k += nb;
        }
    }

    /// Forward pass on already-scaled input; returns the activations of
    /// every layer (input first, scalar output last).
    fn forward(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![z.to_vec()];
        let last = self.layers.len() - 1;
        for (li, l) in self.layers.iter().enumerate() {
            let input = acts.last().unwrap();
            let n_in = input.len();
            let out: Vec<f64> = l
                .biases
                .iter()
                .enumerate()
                .map(|(o, b)| {
                    let s = b + l.weights[o * n_in..(o + 1) * n_in]
                        .iter()
                        .zip(input)
                        .map(|(w, x)| w * x)
                        .sum::<f64>();
                    if li == last {
                        s
                    } else {
                        s.tanh()
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    /// Gradient of the scalar output with respect to all parameters.
    fn output_gradient(&self, acts: &[Vec<f64>]) -> Vec<f64> {
        let mut grad = vec![0.0; self.n_params()];
        let offsets = layer_offsets(&self.layer_sizes);
        let mut delta = vec![1.0];
        for li in (0..self.layers.len()).rev() {
            let input = &acts[li];
            let n_in = input.len();
            let off = offsets[li];
            for (o, d) in delta.iter().enumerate() {
                for (i, x) in input.iter().enumerate() {
                    grad[off + o * n_in + i] = d * x;
                }
                grad[off + delta.len() * n_in + o] = *d;
            }
            if li > 0 {
                let w = &self.layers[li].weights;
                delta = (0..n_in)
                    .map(|i| {
                        let back: f64 = delta.iter().enumerate().map(|(o, d)| d * w[o * n_in + i]).sum();
                        back * (1.0 - input[i] * input[i])
                    })
                    .collect();
            }
        }
        grad
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        let z = self.scaler.transform(features)?;
        Ok(self.forward(&z).last().unwrap()[0])
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn layer_offsets(sizes: &[usize]) -> Vec<usize> {
    let mut off = 0;
    sizes
        .windows(2)
        .map(|w| {
            let o = off;
            off += w[0] * w[1] + w[1];
            o
        })
        .collect()
}

fn init_layers(sizes: &[usize], rng: &mut impl Rng) -> Vec<Layer> {
    sizes
        .windows(2)
        .map(|w| {
            let bound = 1.0 / (w[0] as f64).sqrt();
            let mut draw = || rng.gen_range(-bound..=bound);
            Layer {
                weights: (0..w[0] * w[1]).map(|_| draw()).collect(),
                biases: (0..w[1]).map(|_| draw()).collect(),
            }
        })
        .collect()
}

fn residuals(model: &MlpModel, z: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    z.iter()
        .zip(y)
        .map(|(zi, yi)| model.forward(zi).last().unwrap()[0] - yi)
        .collect()
}

fn mse(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64
}

/// Residual Jacobian, one row per sample.
fn jacobian(model: &MlpModel, z: &[Vec<f64>]) -> DMatrix<f64> {
    let p = model.n_params();
    let mut j = DMatrix::zeros(z.len(), p);
    for (k, zk) in z.iter().enumerate() {
        let g = model.output_gradient(&model.forward(zk));
        for (c, v) in g.into_iter().enumerate() {
            j[(k, c)] = v;
        }
    }
    j
}

/// LM step `δ = −Jᵀ (J Jᵀ + λI)^{-1} r`, solved in sample space.
fn lm_step(j: &DMatrix<f64>, r: &[f64], lambda: f64) -> Option<DVector<f64>> {
    let k = j.nrows();
    let mut a = j * j.transpose();
    for i in 0..k {
        a[(i, i)] += lambda;
    }
    let chol = a.cholesky()?;
    let y = chol.solve(&DVector::from_column_slice(r));
    Some(-(j.transpose() * y))
}

pub fn train_mlp(
    features: &[Vec<f64>],
    targets: &[f64],
    params: &MlpParams,
    rng_seed: u64,
) -> Result<(MlpModel, LmReport)> {
    if features.is_empty() {
        return Err(Error::Training("empty corpus".into()));
    }
    check_len(features.len(), targets.len())?;
    if params.hidden.contains(&0) {
        return Err(Error::InvalidArgument("hidden layers must be non-empty".into()));
    }
    let scaler = MinMaxScaler::fit(features)?;
    let z: Vec<Vec<f64>> = features.iter().map(|f| scaler.transform(f)).collect::<Result<_>>()?;
    let mut sizes = vec![scaler.dim()];
    sizes.extend_from_slice(&params.hidden);
    sizes.push(1);

    for restart in 0..=MAX_RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rng.set_stream(restart);
        let mut model = MlpModel {
            layers: init_layers(&sizes, &mut rng),
            layer_sizes: sizes.clone(),
            scaler: scaler.clone(),
        };
        if let Some(report) = levenberg_marquardt(&mut model, &z, targets, params, restart) {
            return Ok((model, report));
        }
        log::warn!("non-finite loss in network training; restarting ({})", restart + 1);
    }
    Err(Error::Training(format!(
        "network training produced non-finite loss after {MAX_RESTARTS} restarts"
    )))
}

/// Returns `None` when the loss becomes non-finite.
fn levenberg_marquardt(
    model: &mut MlpModel,
    z: &[Vec<f64>],
    y: &[f64],
    params: &MlpParams,
    restarts: u64,
) -> Option<LmReport> {
    let mut r = residuals(model, z, y);
    let mut loss = mse(&r);
    if !loss.is_finite() {
        return None;
    }
    let mut history = vec![loss];
    let mut lambda = LAMBDA_INIT;
    let mut epochs = 0;
    'epochs: while epochs < params.max_epochs && loss > params.target_mse {
        epochs += 1;
        let j = jacobian(model, z);
        let theta = model.params();
        loop {
            let Some(delta) = lm_step(&j, &r, lambda) else {
                lambda *= 10.0;
                if lambda > LAMBDA_MAX {
                    break 'epochs;
                }
                continue;
            };
            let trial: Vec<f64> = theta.iter().zip(delta.iter()).map(|(t, d)| t + d).collect();
            model.set_params(&trial);
            let r_new = residuals(model, z, y);
            let loss_new = mse(&r_new);
            if !delta.iter().all(|d| d.is_finite()) {
                return None;
            }
            if loss_new < loss {
                r = r_new;
                loss = loss_new;
                history.push(loss);
                lambda = (lambda / 10.0).max(1e-20);
                break;
            }
            model.set_params(&theta);
            lambda *= 10.0;
            if lambda > LAMBDA_MAX {
                break 'epochs;
            }
        }
    }
    Some(LmReport {
        epochs,
        restarts,
        loss_history: history,
        final_lambda: lambda,
    })
}

pub fn predict_mlp(model: &MlpModel, features: &[f64]) -> Result<f64> {
    model.predict(features)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_scaler(d: usize) -> MinMaxScaler {
        MinMaxScaler {
            min: vec![-1.0; d],
            max: vec![1.0; d],
            active: vec![true; d],
        }
    }

    #[test]
    fn zero_weights_give_output_bias() {
        let m = MlpModel {
            layer_sizes: vec![2, 3, 1],
            layers: vec![
                Layer { weights: vec![0.0; 6], biases: vec![0.0; 3] },
                Layer { weights: vec![0.0; 3], biases: vec![0.37] },
            ],
            scaler: identity_scaler(2),
        };
        assert_eq!(m.predict(&[0.4, -0.9]).unwrap(), 0.37);
    }

    #[test]
    fn hand_computed_one_two_one() {
        let m = MlpModel {
            layer_sizes: vec![1, 2, 1],
            layers: vec![
                Layer { weights: vec![0.5, -1.0], biases: vec![0.1, 0.2] },
                Layer { weights: vec![2.0, 3.0], biases: vec![-0.5] },
            ],
            scaler: identity_scaler(1),
        };
        let x = 0.3;
        let expect = 2.0 * (0.5 * x + 0.1f64).tanh() + 3.0 * (-x + 0.2f64).tanh() - 0.5;
        assert!((m.predict(&[x]).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sizes = vec![3, 4, 2, 1];
        let mut m = MlpModel {
            layers: init_layers(&sizes, &mut rng),
            layer_sizes: sizes,
            scaler: identity_scaler(3),
        };
        let z = vec![vec![0.1, -0.4, 0.9], vec![-0.7, 0.2, 0.0], vec![0.5, 0.5, -0.5]];
        let y = vec![0.3, -0.1, 0.8];
        let j = jacobian(&m, &z);
        let theta = m.params();
        let h = 1e-6;
        for c in 0..theta.len() {
            let mut tp = theta.clone();
            tp[c] += h;
            m.set_params(&tp);
            let rp = residuals(&m, &z, &y);
            tp[c] -= 2.0 * h;
            m.set_params(&tp);
            let rm = residuals(&m, &z, &y);
            m.set_params(&theta);
            for k in 0..3 {
                let fd = (rp[k] - rm[k]) / (2.0 * h);
                assert!((fd - j[(k, c)]).abs() <= 1e-5 * fd.abs().max(1e-3), "param {c} sample {k}");
            }
        }
    }

    #[test]
    fn constant_target_is_learned() {
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let ys = vec![0.45; 12];
        let (m, rep) = train_mlp(&xs, &ys, &MlpParams { hidden: vec![5, 5], target_mse: 1e-12, ..Default::default() }, 3).unwrap();
        for x in &xs {
            assert!((m.predict(x).unwrap() - 0.45).abs() < 1e-4);
        }
        assert!(rep.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn training_is_deterministic() {
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![(i as f64).sin(), (i as f64).cos()]).collect();
        let ys: Vec<f64> = (0..10).map(|i| 0.2 + 0.03 * i as f64).collect();
        let p = MlpParams { hidden: vec![5, 5], max_epochs: 50, ..Default::default() };
        let (a, _) = train_mlp(&xs, &ys, &p, 8).unwrap();
        let (b, _) = train_mlp(&xs, &ys, &p, 8).unwrap();
        assert_eq!(a, b);
    }
}
