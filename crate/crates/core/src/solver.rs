//! Hermite collocation for `u_t = u_xx + f` on the real line.
//!
//! The solution is carried as `u_N(x, t) = p_N(x, t) e^{−α²x²}` with `p_N`
//! stored by its values at the Gauss–Hermite nodes, which double as the
//! physical collocation points. Time stepping is forward Euler with α held
//! fixed inside a segment; changing α rescales the node values so that `u_N`
//! is preserved at the nodes.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_len, Error, Result};
use crate::hermite::{ln_norm_factor, normalized_all, HermiteBasis};
use crate::transform::{rescale_point_values, Expansion, NodalFunction};

/// Any node value beyond this magnitude marks the run as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e10;

/// Number of points of the dense grid used for the sup-norm error.
pub const FINE_GRID_POINTS: usize = 2001;

/// Source term `f(x, t)`; `None` means the homogeneous equation.
pub type Forcing<'a> = Option<&'a (dyn Fn(f64, f64) -> f64 + Sync)>;

/// `α(t) = 1 / (2√(t+1))`, the width of the homogeneous exact solution.
pub fn homogeneous_alpha(t: f64) -> f64 {
    0.5 / (t + 1.0).sqrt()
}

pub fn homogeneous_alpha_prime(t: f64) -> f64 {
    -0.25 * (t + 1.0).powf(-1.5)
}

/// `u(x, t) = 2α(t) e^{−α(t)² x²}`.
pub fn exact_homogeneous(x: f64, t: f64) -> f64 {
    let a = homogeneous_alpha(t);
    2.0 * a * (-a * a * x * x).exp()
}

/// `α(t) = √2 / √(3t+1)`: decays from √2 to 1/√2 over `[0, 1]`.
pub fn nonhomogeneous_alpha(t: f64) -> f64 {
    (2.0 / (3.0 * t + 1.0)).sqrt()
}

/// `u(x, t) = (cos(xt/2) + 2(t sin x)²) e^{−α(t)² x²}`.
pub fn exact_nonhomogeneous(x: f64, t: f64) -> f64 {
    let a2 = 2.0 / (3.0 * t + 1.0);
    let s = t * x.sin();
    ((0.5 * x * t).cos() + 2.0 * s * s) * (-a2 * x * x).exp()
}

/// `f = u_t − u_xx` for [`exact_nonhomogeneous`].
pub fn forcing_nonhomogeneous(x: f64, t: f64) -> f64 {
    // u = g E with E = e^{−a x²}, a = α² = 2/(3t+1), a′ = −3a²/2
    let a = 2.0 / (3.0 * t + 1.0);
    let da = -1.5 * a * a;
    let (sin_x, cos_x) = x.sin_cos();
    let (sin_h, cos_h) = (0.5 * x * t).sin_cos();
    let sin2x = 2.0 * sin_x * cos_x;
    let cos2x = cos_x * cos_x - sin_x * sin_x;

    let g = cos_h + 2.0 * t * t * sin_x * sin_x;
    let g_t = -0.5 * x * sin_h + 4.0 * t * sin_x * sin_x;
    let g_x = -0.5 * t * sin_h + 2.0 * t * t * sin2x;
    let g_xx = -0.25 * t * t * cos_h + 4.0 * t * t * cos2x;

    let u_t = g_t - da * x * x * g;
    let u_xx = g_xx - 4.0 * a * x * g_x + (4.0 * a * a * x * x - 2.0 * a) * g;
    (u_t - u_xx) * (-a * x * x).exp()
}

/// The two manufactured test problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Homogeneous,
    Nonhomogeneous,
}

impl Problem {
    pub fn exact(self, x: f64, t: f64) -> f64 {
        match self {
            Problem::Homogeneous => exact_homogeneous(x, t),
            Problem::Nonhomogeneous => exact_nonhomogeneous(x, t),
        }
    }

    pub fn exact_alpha(self, t: f64) -> f64 {
        match self {
            Problem::Homogeneous => homogeneous_alpha(t),
            Problem::Nonhomogeneous => nonhomogeneous_alpha(t),
        }
    }

    pub fn forcing(self) -> Forcing<'static> {
        match self {
            Problem::Homogeneous => None,
            Problem::Nonhomogeneous => Some(&forcing_nonhomogeneous),
        }
    }

    /// Node values of `p_N(·, 0)` for the exact initial datum at scaling `alpha`.
    pub fn initial_p(self, basis: &HermiteBasis, alpha: f64) -> Vec<f64> {
        basis
            .nodes()
            .iter()
            .map(|&x| self.exact(x, 0.0) * (alpha * alpha * x * x).exp())
            .collect()
    }
}

/// Equispaced grid for the sup-norm error: `[−8, 8]` for `N ≤ 10`,
/// `[−5, 5]` beyond.
pub fn fine_grid(n: usize) -> Vec<f64> {
    let half = if n <= 10 { 8.0 } else { 5.0 };
    linspace(-half, half, FINE_GRID_POINTS)
}

pub(crate) fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    let h = (b - a) / (count - 1) as f64;
    (0..count).map(|i| a + h * i as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    /// Euclidean norm of the nodal errors.
    pub n1: f64,
    /// Maximum error on the dense grid.
    pub n2: f64,
    /// Quadrature-weighted Euclidean norm of the nodal errors.
    pub n3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergence {
    pub step: u64,
    pub t: f64,
}

/// Node values of `p_N` together with the current α and time.
#[derive(Debug, Clone)]
pub struct SpectralState {
    basis: Arc<HermiteBasis>,
    p: Vec<f64>,
    alpha: f64,
    t: f64,
    steps: u64,
    divergence: Option<Divergence>,
}

impl SpectralState {
    pub fn new(basis: Arc<HermiteBasis>, p_at_nodes: Vec<f64>, alpha: f64, t: f64) -> Result<Self> {
        check_len(basis.n(), p_at_nodes.len())?;
        check_alpha(alpha)?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be finite and non-negative, got {t}")));
        }
        if p_at_nodes.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite node value".into()));
        }
        Ok(Self {
            basis,
            p: p_at_nodes,
            alpha,
            t,
            steps: 0,
            divergence: None,
        })
    }

    /// State representing the physical profile `u` at time `t`:
    /// `p_j = u(ξ_j) e^{α² ξ_j²}`.
    pub fn from_profile(basis: Arc<HermiteBasis>, alpha: f64, t: f64, u: impl Fn(f64) -> f64) -> Result<Self> {
        check_alpha(alpha)?;
        let p = basis
            .nodes()
            .iter()
            .map(|&x| u(x) * (alpha * alpha * x * x).exp())
            .collect();
        Self::new(basis, p, alpha, t)
    }

    pub fn basis(&self) -> &Arc<HermiteBasis> {
        &self.basis
    }

    pub fn p_at_nodes(&self) -> &[f64] {
        &self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Euler steps taken since construction.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn divergence(&self) -> Option<Divergence> {
        self.divergence
    }

    pub fn is_diverged(&self) -> bool {
        self.divergence.is_some()
    }

    /// `u_N(ξ_j) = p_j e^{−α² ξ_j²}`.
    pub fn u_at_nodes(&self) -> Vec<f64> {
        let a2 = self.alpha * self.alpha;
        self.p
            .iter()
            .zip(self.basis.nodes())
            .map(|(p, x)| p * (-a2 * x * x).exp())
            .collect()
    }

    /// `u_N` on an arbitrary grid.
    pub fn evaluate(&self, grid: &[f64]) -> Vec<f64> {
        crate::transform::evaluate_hermite_function(&self.p, &self.basis, self.alpha, grid)
    }

    /// Hermite coefficients of `u_N` in the basis of the current α.
    pub fn expansion(&self) -> Result<Expansion> {
        let values = self
            .basis
            .nodes()
            .iter()
            .map(|&xi| self.basis.interpolate(&self.p, xi / self.alpha))
            .collect();
        crate::transform::pv_to_fc(
            &self.basis,
            &NodalFunction {
                alpha: self.alpha,
                values,
            },
        )
    }

    /// Collocated time derivative of the node values:
    ///
    /// `(D²p)_j − 4α²ξ_j(D¹p)_j + 2α²(2α²ξ_j² − 1)p_j + 2αα′ξ_j²p_j + f(ξ_j, t)e^{α²ξ_j²}`.
    pub fn collocation_rhs(&self, alpha_prime: f64, forcing: Forcing<'_>) -> Vec<f64> {
        let n = self.basis.n();
        let a = self.alpha;
        let a2 = a * a;
        let d1p = self.basis.d1() * nalgebra::DVector::from_column_slice(&self.p);
        let d2p = self.basis.d2() * nalgebra::DVector::from_column_slice(&self.p);
        (0..n)
            .map(|j| {
                let x = self.basis.nodes()[j];
                let mut r = d2p[j] - 4.0 * a2 * x * d1p[j]
                    + 2.0 * a2 * (2.0 * a2 * x * x - 1.0) * self.p[j]
                    + 2.0 * a * alpha_prime * x * x * self.p[j];
                if let Some(f) = forcing {
                    r += f(x, self.t) * (a2 * x * x).exp();
                }
                r
            })
            .collect()
    }

    /// Row-major operator `D² − 4α² diag(ξ) D¹ + diag(2α²(2α²ξ² − 1))`.
    fn operator(&self) -> Vec<f64> {
        let n = self.basis.n();
        let a2 = self.alpha * self.alpha;
        let (d1, d2) = (self.basis.d1(), self.basis.d2());
        let mut op = vec![0.0; n * n];
        for i in 0..n {
            let x = self.basis.nodes()[i];
            for j in 0..n {
                op[i * n + j] = d2[(i, j)] - 4.0 * a2 * x * d1[(i, j)];
            }
            op[i * n + i] += 2.0 * a2 * (2.0 * a2 * x * x - 1.0);
        }
        op
    }

    /// One forward Euler step with α frozen.
    pub fn euler_step(&mut self, dt: f64, forcing: Forcing<'_>) -> Result<()> {
        self.run_segment(1, dt, forcing)
    }

    /// `m` forward Euler steps with α frozen. Stops at the first step whose
    /// node values trip the divergence sentinel.
    pub fn run_segment(&mut self, m: u64, dt: f64, forcing: Forcing<'_>) -> Result<()> {
        if let Some(d) = self.divergence {
            return Err(Error::Diverged { step: d.step, t: d.t });
        }
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be finite and non-negative, got {dt}")));
        }
        let n = self.basis.n();
        let op = self.operator();
        let a2 = self.alpha * self.alpha;
        let nodes = self.basis.nodes().to_vec();
        let gauss_inv: Vec<f64> = nodes.iter().map(|x| (a2 * x * x).exp()).collect();
        let t0 = self.t;
        let mut next = vec![0.0; n];

        for k in 0..m {
            let t = t0 + k as f64 * dt;
            let mut bad = false;
            for i in 0..n {
                let row = &op[i * n..(i + 1) * n];
                let mut s: f64 = row.iter().zip(&self.p).map(|(a, p)| a * p).sum();
                if let Some(f) = forcing {
                    s += f(nodes[i], t) * gauss_inv[i];
                }
                let v = self.p[i] + dt * s;
                bad |= v.is_nan() || v.abs() > DIVERGENCE_THRESHOLD;
                next[i] = v;
            }
            std::mem::swap(&mut self.p, &mut next);
            self.steps += 1;
            self.t = t0 + (k + 1) as f64 * dt;
            if bad {
                let d = Divergence {
                    step: self.steps,
                    t: self.t,
                };
                self.divergence = Some(d);
                return Err(Error::Diverged { step: d.step, t: d.t });
            }
        }
        Ok(())
    }

    /// Re-expresses the state against `e^{−α_new² x²}`; `u_N` is unchanged
    /// at the nodes.
    /// A rescaled value past the divergence threshold marks the run as
    /// diverged.
    pub fn switch_alpha(&mut self, alpha_new: f64) -> Result<()> {
        if let Some(d) = self.divergence {
            return Err(Error::Diverged { step: d.step, t: d.t });
        }
        self.p = rescale_point_values(&self.basis, &self.p, self.alpha, alpha_new)?;
        self.alpha = alpha_new;
        if self.p.iter().any(|v| v.is_nan() || v.abs() > DIVERGENCE_THRESHOLD) {
            let d = Divergence {
                step: self.steps,
                t: self.t,
            };
            self.divergence = Some(d);
            return Err(Error::Diverged { step: d.step, t: d.t });
        }
        Ok(())
    }

    /// Error norms of `u_N` against `exact` at the current time.
    pub fn error_norms(&self, exact: impl Fn(f64) -> f64, fine_grid: &[f64]) -> ErrorNorms {
        let u = self.u_at_nodes();
        let mut s1 = 0.0;
        let mut s3 = 0.0;
        for ((&x, &w), &un) in self.basis.nodes().iter().zip(self.basis.weights()).zip(&u) {
            let e = exact(x) - un;
            s1 += e * e;
            s3 += e * e * w;
        }
        let n2 = self
            .evaluate(fine_grid)
            .iter()
            .zip(fine_grid)
            .fold(0.0f64, |m, (un, &x)| m.max((exact(x) - un).abs()));
        ErrorNorms {
            n1: s1.sqrt(),
            n2,
            n3: s3.sqrt(),
        }
    }
}

/// Galerkin system for the coefficients of
/// `u = π^{−1/2} Σ_m û_m H_m(αx) e^{−α²x²}`:
///
/// `dû_m/dt = (α′/(2α) + α²) û_{m−2} + (m+1)(α′/α) û_m + f̂_m`.
pub fn galerkin_rhs(coeffs: &[f64], alpha: f64, alpha_prime: f64, f_coeffs: Option<&[f64]>) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if let Some(f) = f_coeffs {
        check_len(coeffs.len(), f.len())?;
    }
    let ratio = alpha_prime / alpha;
    let lower = 0.5 * ratio + alpha * alpha;
    Ok((0..coeffs.len())
        .map(|m| {
            let mut r = (m as f64 + 1.0) * ratio * coeffs[m];
            if m >= 2 {
                r += lower * coeffs[m - 2];
            }
            if let Some(f) = f_coeffs {
                r += f[m];
            }
            r
        })
        .collect())
}

/// Forward Euler on [`galerkin_rhs`] with constant α and no forcing.
pub fn galerkin_evolve(coeffs: &[f64], alpha: f64, dt: f64, steps: u64) -> Result<Vec<f64>> {
    let mut c = coeffs.to_vec();
    for _ in 0..steps {
        let r = galerkin_rhs(&c, alpha, 0.0, None)?;
        for (ci, ri) in c.iter_mut().zip(r) {
            *ci += dt * ri;
        }
    }
    Ok(c)
}

/// Converts coefficients from [`Expansion`] scaling to the Galerkin scaling.
pub fn to_galerkin_coeffs(exp: &Expansion) -> Vec<f64> {
    exp.coeffs.iter().map(|c| c * PI.sqrt()).collect()
}

/// Closed-form even coefficient `û_m = √π α^m t^{m/2} / (m/2)!` for constant
/// α and initial datum `e^{−α²x²}`.
pub fn galerkin_exact_coeffs(m: usize, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if m % 2 == 1 {
        return Err(Error::OddMode(m));
    }
    let k = m / 2;
    if k == 0 {
        return Ok(PI.sqrt());
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let ln_fact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    Ok(PI.sqrt() * (m as f64 * alpha.ln() + k as f64 * t.ln() - ln_fact).exp())
}

/// Truncated series `e^{−α²x²} Σ_{ℓ<n_terms} α^{2ℓ} (t^ℓ/ℓ!) H_{2ℓ}(αx)`,
/// the constant-α solution from `u(x, 0) = e^{−α²x²}`; converges for
/// `t < 1`.
pub fn constant_alpha_series(x: f64, t: f64, alpha: f64, n_terms: usize) -> f64 {
    if n_terms == 0 {
        return 0.0;
    }
    let z = alpha * x;
    let h = normalized_all(2 * (n_terms - 1), z);
    let quarter_ln_pi = 0.25 * PI.ln();
    let mut sum = h[0] * quarter_ln_pi.exp();
    let mut ln_fact = 0.0;
    if t > 0.0 {
        let ln_a2t = (alpha * alpha * t).ln();
        for l in 1..n_terms {
            ln_fact += (l as f64).ln();
            let ln_scale = 0.5 * ln_norm_factor(2 * l) + quarter_ln_pi;
            sum += h[2 * l] * (l as f64 * ln_a2t - ln_fact + ln_scale).exp();
        }
    }
    sum * (-z * z).exp()
}

/// Partial sums of the series above at `x = 0`, from the closed form
/// `H_{2ℓ}(0) = (−1)^ℓ (2ℓ)!/ℓ!`: `Σ_{ℓ<n} C(2ℓ, ℓ) (−α²t)^ℓ`.
pub fn maclaurin_partial_sum(alpha: f64, t: f64, n_terms: usize) -> f64 {
    let q = -alpha * alpha * t;
    let mut term = 1.0;
    let mut sum = 0.0;
    for l in 0..n_terms {
        sum += term;
        let lf = l as f64;
        term *= (2.0 * lf + 1.0) * (2.0 * lf + 2.0) / ((lf + 1.0) * (lf + 1.0)) * q;
    }
    sum
}
