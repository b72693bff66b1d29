//! Assigning a scaling factor to a profile: the α whose Hermite interpolant
//! `p̃(x) e^{−α²x²}` (with `p̃` matching the profile at the nodes) best fits
//! the profile in the sup norm on a fine grid.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::hermite::HermiteBasis;
use crate::solver::linspace;

pub const ALPHA_GRID_POINTS: usize = 101;
pub const GOLDEN_TOL: f64 = 1e-4;
pub const GAMMA_GRID_POINTS: usize = 1001;
pub const GAMMA_GRID_HALFWIDTH: f64 = 5.0;

/// 1001 equispaced points on `[−5, 5]`.
pub fn gamma_grid() -> Vec<f64> {
    linspace(-GAMMA_GRID_HALFWIDTH, GAMMA_GRID_HALFWIDTH, GAMMA_GRID_POINTS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labeling {
    pub alpha: f64,
    pub p_tilde_at_nodes: Vec<f64>,
    pub gamma_min: f64,
}

/// Evaluates `Γ(α) = max_grid |s(x) − p̃(x) e^{−α²x²}|` for a fixed profile.
pub struct GammaEvaluator<'a> {
    basis: &'a HermiteBasis,
    s_nodes: Vec<f64>,
    s_grid: Vec<f64>,
    grid: Vec<f64>,
    interp: nalgebra::DMatrix<f64>,
}

impl<'a> GammaEvaluator<'a> {
    pub fn new(basis: &'a HermiteBasis, profile: impl Fn(f64) -> f64, fine_grid: &[f64]) -> Self {
        Self {
            basis,
            s_nodes: basis.nodes().iter().map(|&x| profile(x)).collect(),
            s_grid: fine_grid.iter().map(|&x| profile(x)).collect(),
            grid: fine_grid.to_vec(),
            interp: basis.interpolation_matrix(fine_grid),
        }
    }

    pub fn p_tilde(&self, alpha: f64) -> Vec<f64> {
        let a2 = alpha * alpha;
        self.s_nodes
            .iter()
            .zip(self.basis.nodes())
            .map(|(s, x)| s * (a2 * x * x).exp())
            .collect()
    }

    pub fn gamma(&self, alpha: f64) -> f64 {
        let a2 = alpha * alpha;
        let p = DVector::from_vec(self.p_tilde(alpha));
        let fit = &self.interp * p;
        self.grid
            .iter()
            .zip(&self.s_grid)
            .zip(fit.iter())
            .fold(0.0f64, |m, ((&x, s), f)| m.max((s - f * (-a2 * x * x).exp()).abs()))
    }
}

/// Γ on `count` equispaced α values spanning `interval`.
pub fn gamma_profile(eval: &GammaEvaluator<'_>, interval: (f64, f64), count: usize) -> (Vec<f64>, Vec<f64>) {
    let alphas = linspace(interval.0, interval.1, count);
    let gammas = alphas.iter().map(|&a| eval.gamma(a)).collect();
    (alphas, gammas)
}

/// Grid search over 101 candidates followed by golden-section refinement
/// (to `1e−4`) between the neighbours of the best candidate.
pub fn minimizing_hermite_function(
    basis: &HermiteBasis,
    profile: impl Fn(f64) -> f64,
    alpha_interval: (f64, f64),
    fine_grid: &[f64],
) -> Labeling {
    let eval = GammaEvaluator::new(basis, profile, fine_grid);
    minimize(&eval, alpha_interval, ALPHA_GRID_POINTS)
}

pub(crate) fn minimize(eval: &GammaEvaluator<'_>, interval: (f64, f64), grid_points: usize) -> Labeling {
    let (alphas, gammas) = gamma_profile(eval, interval, grid_points);
    let (best, _) = gammas
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &g)| if g < bv { (i, g) } else { (bi, bv) });
    let lo = alphas[best.saturating_sub(1)];
    let hi = alphas[(best + 1).min(alphas.len() - 1)];
    let (ga, gv) = golden_section(|a| eval.gamma(a), lo, hi, GOLDEN_TOL);
    let (alpha, gamma_min) = if gv <= gammas[best] {
        (ga, gv)
    } else {
        (alphas[best], gammas[best])
    };
    Labeling {
        alpha,
        p_tilde_at_nodes: eval.p_tilde(alpha),
        gamma_min,
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// True when the sequence only decreases and then only increases (ties
/// ignored), i.e. it has a single local minimum.
pub fn is_unimodal(values: &[f64]) -> bool {
    let mut rising = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d > 0.0 {
            rising = true;
        } else if d < 0.0 && rising {
            return false;
        }
    }
    true
}
