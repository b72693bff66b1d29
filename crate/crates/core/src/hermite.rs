//! Hermite polynomials, Gauss–Hermite quadrature and collocation
//! differentiation matrices.
//!
//! Polynomials follow the physicists' convention: `H_0 = 1`, `H_1 = 2ζ`,
//! `H_{n+1} = 2ζ H_n − 2n H_{n−1}`, orthogonal under the weight `e^{−ζ²}`.
//! Quadrature weights absorb that weight, so
//! `Σ_j q(ξ_j) w_j = ∫ q(x) e^{−x²} dx` for every polynomial of degree `< 2N`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{check_len, Error, Result};

/// Largest supported node count.
pub const MAX_NODES: usize = 200;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 20;

/// `H_n(ζ)` by the three-term recurrence.
pub fn hermite_eval(n: usize, zeta: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * zeta;
    for k in 1..n {
        let next = 2.0 * zeta * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `[H_0(ζ), …, H_{n_max}(ζ)]` in a single recurrence pass.
pub fn hermite_eval_all(n_max: usize, zeta: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max >= 1 {
        out.push(2.0 * zeta);
    }
    for k in 1..n_max {
        let next = 2.0 * zeta * out[k] - 2.0 * k as f64 * out[k - 1];
        out.push(next);
    }
    out
}

/// `H_n′(ζ) = 2n H_{n−1}(ζ)`.
pub fn hermite_derivative(n: usize, zeta: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        2.0 * n as f64 * hermite_eval(n - 1, zeta)
    }
}

/// Orthonormal Hermite polynomials `h_k = H_k / sqrt(2^k k! √π)` for
/// `k = 0..=n_max`. These stay finite far past the range where `H_k` itself
/// overflows.
pub(crate) fn normalized_all(n_max: usize, zeta: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(PI.powf(-0.25));
    if n_max >= 1 {
        out.push(2f64.sqrt() * zeta * out[0]);
    }
    for k in 1..n_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * zeta * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// `(h_n(ζ), h_{n−1}(ζ))` of the orthonormal family; `h_{−1} = 0`.
fn normalized_pair(n: usize, zeta: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * zeta * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `ln(2^k k!)`.
pub(crate) fn ln_norm_factor(k: usize) -> f64 {
    (1..=k).map(|i| (2.0 * i as f64).ln()).sum()
}

/// Zeros of `H_n`, ascending.
///
/// Eigenvalues of the symmetric tridiagonal Jacobi matrix (zero diagonal,
/// off-diagonal `sqrt(k/2)`) seed a Newton polish on the orthonormal
/// recurrence; the result is symmetrized so that `ξ_j = −ξ_{n+1−j}` exactly.
pub fn compute_nodes(n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::NodeCount(n));
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);

    let dnorm = (2.0 * n as f64).sqrt();
    for x in nodes.iter_mut() {
        let guess = *x;
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (h, hm1) = normalized_pair(n, *x);
            let step = h / (dnorm * hm1);
            *x -= step;
            if step.abs() <= NEWTON_TOL * x.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !x.is_finite() {
            return Err(Error::RootSolve { n, guess });
        }
    }

    for j in 0..n / 2 {
        let sym = 0.5 * (nodes[n - 1 - j] - nodes[j]);
        nodes[j] = -sym;
        nodes[n - 1 - j] = sym;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(nodes)
}

/// Gauss–Hermite weights `w_j = √π 2^{n+1} n! / H_n′(ξ_j)²`, evaluated in log
/// space.
pub fn compute_weights(n: usize, nodes: &[f64]) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::NodeCount(n));
    }
    check_len(n, nodes.len())?;
    let ln_pi = PI.ln();
    let ln_prefactor = 0.5 * ln_pi + 2f64.ln() + ln_norm_factor(n);
    // ln |H_{n-1}| = ln |h_{n-1}| + ½ ln(2^{n-1} (n-1)! √π)
    let ln_scale_nm1 = 0.5 * (ln_norm_factor(n - 1) + 0.5 * ln_pi);
    let ln_2n = (2.0 * n as f64).ln();

    let mut weights = Vec::with_capacity(n);
    for (index, &x) in nodes.iter().enumerate() {
        let (_, hm1) = normalized_pair(n, x);
        let ln_dh = ln_2n + hm1.abs().ln() + ln_scale_nm1;
        let w = (ln_prefactor - 2.0 * ln_dh).exp();
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::NonFiniteWeight { n, index });
        }
        weights.push(w);
    }
    for j in 0..n / 2 {
        let avg = 0.5 * (weights[j] + weights[n - 1 - j]);
        weights[j] = avg;
        weights[n - 1 - j] = avg;
    }
    Ok(weights)
}

/// Collocation differentiation matrices `(D¹, D²)` on the given nodes.
///
/// Off-diagonal entries come from the barycentric form of the Lagrange
/// derivatives; the diagonal is `d¹_jj = ξ_j` (from `H_N″ = 2ζ H_N′` at the
/// zeros). `D² = D¹ D¹`.
pub fn diff_matrices(n: usize, nodes: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if n == 0 {
        return Err(Error::NodeCount(n));
    }
    check_len(n, nodes.len())?;
    let bary = barycentric_weights(n, nodes);
    let d1 = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            nodes[i]
        } else {
            bary[j] / (bary[i] * (nodes[i] - nodes[j]))
        }
    });
    let d2 = &d1 * &d1;
    Ok((d1, d2))
}

/// Barycentric weights `λ_j ∝ 1 / H_N′(ξ_j)`, scaled to stay finite.
fn barycentric_weights(n: usize, nodes: &[f64]) -> Vec<f64> {
    let raw: Vec<f64> = nodes.iter().map(|&x| 1.0 / normalized_pair(n, x).1).collect();
    let scale = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    raw.into_iter().map(|v| v / scale).collect()
}

pub(crate) type TransformKey = (i64, i64);

/// Fixed-N bundle of Gauss–Hermite nodes, weights and differentiation
/// matrices.
///
/// Immutable after construction except for the internal cache of α-change
/// matrices, which is guarded for concurrent use.
#[derive(Debug)]
pub struct HermiteBasis {
    n: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    // row m: w_j H_m(ξ_j) / (2^m m! √π)
    projection: DMatrix<f64>,
    // row j: H_m(ξ_j)
    synthesis: DMatrix<f64>,
    pub(crate) transform_cache: RwLock<HashMap<TransformKey, Arc<DMatrix<f64>>>>,
}

impl Clone for HermiteBasis {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
            bary: self.bary.clone(),
            d1: self.d1.clone(),
            d2: self.d2.clone(),
            projection: self.projection.clone(),
            synthesis: self.synthesis.clone(),
            transform_cache: RwLock::new(HashMap::new()),
        }
    }
}

impl HermiteBasis {
    pub fn new(n: usize) -> Result<Self> {
        let nodes = compute_nodes(n)?;
        let weights = compute_weights(n, &nodes)?;
        let (d1, d2) = diff_matrices(n, &nodes)?;
        let bary = barycentric_weights(n, &nodes);

        let quarter_ln_pi = 0.25 * PI.ln();
        let scales: Vec<f64> = (0..n)
            .map(|m| 0.5 * ln_norm_factor(m) + quarter_ln_pi)
            .collect();
        let normalized: Vec<Vec<f64>> = nodes.iter().map(|&x| normalized_all(n - 1, x)).collect();
        let projection =
            DMatrix::from_fn(n, n, |m, j| weights[j] * normalized[j][m] * (-scales[m]).exp());
        let synthesis = DMatrix::from_fn(n, n, |j, m| normalized[j][m] * scales[m].exp());

        Ok(Self {
            n,
            nodes,
            weights,
            bary,
            d1,
            d2,
            projection,
            synthesis,
            transform_cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn d1(&self) -> &DMatrix<f64> {
        &self.d1
    }

    pub fn d2(&self) -> &DMatrix<f64> {
        &self.d2
    }

    pub fn barycentric_weights(&self) -> &[f64] {
        &self.bary
    }

    pub(crate) fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    pub(crate) fn synthesis(&self) -> &DMatrix<f64> {
        &self.synthesis
    }

    /// Gauss–Hermite rule applied to polynomial-part samples `q(ξ_j)`.
    pub fn integrate(&self, q_at_nodes: &[f64]) -> Result<f64> {
        check_len(self.n, q_at_nodes.len())?;
        Ok(q_at_nodes.iter().zip(&self.weights).map(|(q, w)| q * w).sum())
    }

    /// Evaluates the degree-(N−1) interpolant through `(ξ_j, values[j])` at
    /// `x` (barycentric form).
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &lj), &vj) in self.nodes.iter().zip(&self.bary).zip(values) {
            let d = x - xj;
            if d == 0.0 {
                return vj;
            }
            let t = lj / d;
            num += t * vj;
            den += t;
        }
        num / den
    }

    /// Matrix `B` with `(B v)_i = interpolant(v)(grid[i])`.
    pub fn interpolation_matrix(&self, grid: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let mut b = DMatrix::zeros(grid.len(), n);
        for (i, &x) in grid.iter().enumerate() {
            if let Some(j) = self.nodes.iter().position(|&xj| xj == x) {
                b[(i, j)] = 1.0;
                continue;
            }
            let terms: Vec<f64> = self
                .nodes
                .iter()
                .zip(&self.bary)
                .map(|(&xj, &lj)| lj / (x - xj))
                .collect();
            let den: f64 = terms.iter().sum();
            for (j, t) in terms.into_iter().enumerate() {
                b[(i, j)] = t / den;
            }
        }
        b
    }

    /// Heuristic interval of scaling factors this basis resolves.
    ///
    /// Lower end: the outermost node still sees the Gaussian above half its
    /// peak. Upper end: at least ⌈N/2⌉ nodes sit where the Gaussian exceeds
    /// `1e−8`.
    pub fn admissible_alpha(&self) -> (f64, f64) {
        if self.n == 1 {
            return (f64::MIN_POSITIVE, f64::INFINITY);
        }
        let outer = self.nodes[self.n - 1];
        let lo = 2f64.ln().sqrt() / outer;
        let mut abs: Vec<f64> = self.nodes.iter().map(|x| x.abs()).collect();
        abs.sort_by(f64::total_cmp);
        let k = self.n.div_ceil(2);
        let hi = (1e8f64).ln().sqrt() / abs[k - 1].max(f64::MIN_POSITIVE);
        (lo, hi)
    }
}

/// `Σ_j q(ξ_j) w_j` for polynomial-part samples.
pub fn gauss_hermite_integrate(basis: &HermiteBasis, f_at_nodes: &[f64]) -> Result<f64> {
    basis.integrate(f_at_nodes)
}
