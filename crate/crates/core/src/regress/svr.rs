//! ν-support-vector regression with an RBF kernel.
//!
//! The dual is the standard ν-SVR problem over `2ℓ` variables `(α, α*)`:
//!
//! ```text
//! min ½ (α − α*)ᵀ K (α − α*) − yᵀ(α − α*)
//! s.t. eᵀ(α − α*) = 0,  eᵀ(α + α*) = C ν ℓ,  0 ≤ α, α* ≤ C
//! ```
//!
//! solved by SMO on pairs from the same half, chosen by maximal KKT
//! violation with second-order gain.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::regress::scaler::MinMaxScaler;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvrParams {
    pub nu: f64,
    /// RBF width; `None` means `1 / n_features`.
    pub gamma: Option<f64>,
    /// Box bound of each dual variable.
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            nu: 0.5,
            gamma: None,
            c: 100.0,
            tol: 1e-6,
            max_iter: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    /// Scaled feature vectors with nonzero dual coefficient.
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i − α*_i` of each support vector.
    pub dual_coeffs: Vec<f64>,
    pub bias: f64,
    pub kernel_gamma: f64,
    pub nu: f64,
    pub c: f64,
    /// Training-set size.
    pub n_train: usize,
    pub iterations: usize,
    pub scaler: MinMaxScaler,
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

pub fn train_svr(features: &[Vec<f64>], targets: &[f64], params: &SvrParams) -> Result<SvrModel> {
    let l = features.len();
    if l == 0 {
        return Err(Error::Training("empty corpus".into()));
    }
    check_len(l, targets.len())?;
    if !(params.nu > 0.0 && params.nu <= 1.0) {
        return Err(Error::InvalidArgument(format!("nu must lie in (0, 1], got {}", params.nu)));
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidArgument(format!("C must be positive, got {}", params.c)));
    }
    let scaler = MinMaxScaler::fit(features)?;
    let x: Vec<Vec<f64>> = features.iter().map(|f| scaler.transform(f)).collect::<Result<_>>()?;
    let d = scaler.dim();
    let gamma = params.gamma.unwrap_or(1.0 / d.max(1) as f64);
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("kernel gamma must be positive, got {gamma}")));
    }

    let first = targets[0];
    if targets.iter().all(|t| *t == first) {
        return Ok(SvrModel {
            support_vectors: Vec::new(),
            dual_coeffs: Vec::new(),
            bias: first,
            kernel_gamma: gamma,
            nu: params.nu,
            c: params.c,
            n_train: l,
            iterations: 0,
            scaler,
        });
    }

    let k: Vec<f64> = (0..l * l).map(|ij| rbf(gamma, &x[ij / l], &x[ij % l])).collect();
    let kk = |i: usize, j: usize| k[(i % l) * l + (j % l)];
    let c = params.c;

    // variables 0..l carry y = +1 (α), l..2l carry y = −1 (α*)
    let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
    let mut alpha = vec![0.0; 2 * l];
    let mut sum = c * params.nu * l as f64 / 2.0;
    for i in 0..l {
        let v = sum.min(c);
        alpha[i] = v;
        alpha[i + l] = v;
        sum -= v;
    }
    let p: Vec<f64> = (0..2 * l).map(|t| if t < l { -targets[t] } else { targets[t - l] }).collect();
    let mut g: Vec<f64> = (0..2 * l)
        .map(|t| p[t] + (0..2 * l).map(|s| sign(t) * sign(s) * kk(t, s) * alpha[s]).sum::<f64>())
        .collect();

    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;
    let mut iterations = 0;
    loop {
        if iterations >= params.max_iter {
            return Err(Error::Training(format!("SMO did not converge in {} iterations", params.max_iter)));
        }
        // first index per half: largest violator
        let (mut gmaxp, mut ip) = (f64::NEG_INFINITY, usize::MAX);
        let (mut gmaxn, mut in_) = (f64::NEG_INFINITY, usize::MAX);
        for t in 0..2 * l {
            if t < l {
                if !upper(alpha[t]) && -g[t] >= gmaxp {
                    gmaxp = -g[t];
                    ip = t;
                }
            } else if !lower(alpha[t]) && g[t] >= gmaxn {
                gmaxn = g[t];
                in_ = t;
            }
        }
        let (mut gmaxp2, mut gmaxn2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut best = (usize::MAX, f64::INFINITY);
        for j in 0..2 * l {
            if j < l {
                if !lower(alpha[j]) {
                    gmaxp2 = gmaxp2.max(g[j]);
                    let diff = gmaxp + g[j];
                    if ip != usize::MAX && diff > 0.0 {
                        let quad = (kk(ip, ip) + kk(j, j) - 2.0 * kk(ip, j)).max(TAU);
                        let obj = -diff * diff / quad;
                        if obj <= best.1 {
                            best = (j, obj);
                        }
                    }
                }
            } else if !upper(alpha[j]) {
                gmaxn2 = gmaxn2.max(-g[j]);
                let diff = gmaxn - g[j];
                if in_ != usize::MAX && diff > 0.0 {
                    let quad = (kk(in_, in_) + kk(j, j) - 2.0 * kk(in_, j)).max(TAU);
                    let obj = -diff * diff / quad;
                    if obj <= best.1 {
                        best = (j, obj);
                    }
                }
            }
        }
        if (gmaxp + gmaxp2).max(gmaxn + gmaxn2) < params.tol || best.0 == usize::MAX {
            break;
        }
        let j = best.0;
        let i = if j < l { ip } else { in_ };
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = (kk(i, i) + kk(j, j) - 2.0 * kk(i, j)).max(TAU);
        let delta = (g[i] - g[j]) / quad;
        let total = alpha[i] + alpha[j];
        alpha[i] -= delta;
        alpha[j] += delta;
        if total > c {
            if alpha[i] > c {
                alpha[i] = c;
                alpha[j] = total - c;
            }
        } else if alpha[j] < 0.0 {
            alpha[j] = 0.0;
            alpha[i] = total;
        }
        if total > c {
            if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = total - c;
            }
        } else if alpha[i] < 0.0 {
            alpha[i] = 0.0;
            alpha[j] = total;
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, gt) in g.iter_mut().enumerate() {
            let st = sign(t);
            *gt += st * (sign(i) * kk(t, i) * di + sign(j) * kk(t, j) * dj);
        }
    }

    let rho = {
        let mut r = [0.0; 2];
        for (half, r) in r.iter_mut().enumerate() {
            let range = if half == 0 { 0..l } else { l..2 * l };
            let (mut ub, mut lb, mut free_sum, mut free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
            for t in range {
                if upper(alpha[t]) {
                    lb = lb.max(g[t]);
                } else if lower(alpha[t]) {
                    ub = ub.min(g[t]);
                } else {
                    free += 1;
                    free_sum += g[t];
                }
            }
            *r = if free > 0 { free_sum / free as f64 } else { 0.5 * (ub + lb) };
        }
        0.5 * (r[0] - r[1])
    };

    let mut support_vectors = Vec::new();
    let mut dual_coeffs = Vec::new();
    for i in 0..l {
        let coef = alpha[i] - alpha[i + l];
        if coef != 0.0 {
            support_vectors.push(x[i].clone());
            dual_coeffs.push(coef);
        }
    }
    Ok(SvrModel {
        support_vectors,
        dual_coeffs,
        bias: -rho,
        kernel_gamma: gamma,
        nu: params.nu,
        c,
        n_train: l,
        iterations,
        scaler,
    })
}

impl SvrModel {
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        let z = self.scaler.transform(features)?;
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coeffs)
            .map(|(sv, c)| c * rbf(self.kernel_gamma, sv, &z))
            .sum::<f64>()
            + self.bias)
    }
}

pub fn predict_svr(model: &SvrModel, features: &[f64]) -> Result<f64> {
    model.predict(features)
}
