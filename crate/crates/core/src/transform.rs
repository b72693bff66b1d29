//! Point-value and Fourier-coefficient representations of Hermite
//! expansions, and the re-expansion needed when the scaling factor changes.
//!
//! Coefficient convention: an [`Expansion`] with scaling factor `α` and
//! coefficients `c_ℓ` represents `v(x) = e^{−α²x²} Σ_ℓ c_ℓ H_ℓ(αx)`. With this
//! convention `pv_to_fc` carries the `1/(2^m m! √π)` normalization used for
//! training features, and `fc_to_pv` is its exact inverse.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_alpha, check_len, Error, Result};
use crate::hermite::{ln_norm_factor, normalized_all, HermiteBasis};

/// Overflow bound on the exponent of a point-value rescale.
pub const MAX_RESCALE_EXPONENT: f64 = 700.0;

/// Transform matrices whose condition estimate exceeds this are flagged.
pub const CONDITION_WARN: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub alpha: f64,
    pub coeffs: Vec<f64>,
}

/// Quadrature-ready samples of a physical profile `v`:
/// `values[j] = v(ξ_j / α) · e^{ξ_j²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalFunction {
    pub alpha: f64,
    pub values: Vec<f64>,
}

impl NodalFunction {
    /// Samples a physical profile at the scaled nodes.
    pub fn sample(basis: &HermiteBasis, alpha: f64, v: impl Fn(f64) -> f64) -> Result<Self> {
        check_alpha(alpha)?;
        let values = basis
            .nodes()
            .iter()
            .map(|&xi| v(xi / alpha) * (xi * xi).exp())
            .collect();
        Ok(Self { alpha, values })
    }
}

/// Fourier coefficients from point values:
/// `c_m = Σ_j values[j] H_m(ξ_j) w_j / (2^m m! √π)`.
pub fn pv_to_fc(basis: &HermiteBasis, nodal: &NodalFunction) -> Result<Expansion> {
    check_alpha(nodal.alpha)?;
    check_len(basis.n(), nodal.values.len())?;
    let coeffs = basis.projection() * DVector::from_column_slice(&nodal.values);
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::RepresentationRange);
    }
    Ok(Expansion {
        alpha: nodal.alpha,
        coeffs: coeffs.iter().copied().collect(),
    })
}

/// Point values from Fourier coefficients: `values[j] = Σ_ℓ c_ℓ H_ℓ(ξ_j)`.
pub fn fc_to_pv(basis: &HermiteBasis, exp: &Expansion) -> Result<NodalFunction> {
    check_alpha(exp.alpha)?;
    check_len(basis.n(), exp.coeffs.len())?;
    let values = basis.synthesis() * DVector::from_column_slice(&exp.coeffs);
    Ok(NodalFunction {
        alpha: exp.alpha,
        values: values.iter().copied().collect(),
    })
}

#[derive(Debug, Clone)]
pub struct AlphaChange {
    pub expansion: Expansion,
    /// 2-norm condition estimate of the transform matrix.
    pub condition: f64,
    /// Set when `condition` exceeds [`CONDITION_WARN`]: the target α is
    /// likely outside the range this basis resolves.
    pub ill_conditioned: bool,
}

fn cache_key(alpha: f64) -> i64 {
    (alpha * 1e12).round() as i64
}

/// N×N matrix taking coefficients at `alpha_src` to coefficients at
/// `alpha_dst`, built by Gauss–Hermite quadrature in the source variable:
///
/// `T[m][ℓ] = (1/ρ) Σ_j w_j H_ℓ(ξ_j) H_m(ξ_j/ρ) / (2^m m! √π)`, `ρ = α_src/α_dst`.
///
/// Matrices are cached on the basis, keyed by both α rounded to 12 digits.
pub fn alpha_change_matrix(basis: &HermiteBasis, alpha_src: f64, alpha_dst: f64) -> Result<Arc<DMatrix<f64>>> {
    check_alpha(alpha_src)?;
    check_alpha(alpha_dst)?;
    let key = (cache_key(alpha_src), cache_key(alpha_dst));
    if let Some(m) = basis.transform_cache.read().expect("transform cache poisoned").get(&key) {
        return Ok(Arc::clone(m));
    }

    let n = basis.n();
    let rho = alpha_src / alpha_dst;
    let quarter_ln_pi = 0.25 * std::f64::consts::PI.ln();
    let inv_scales: Vec<f64> = (0..n)
        .map(|m| (-(0.5 * ln_norm_factor(m) + quarter_ln_pi)).exp())
        .collect();
    let mut proj = DMatrix::zeros(n, n);
    for (j, (&xi, &w)) in basis.nodes().iter().zip(basis.weights()).enumerate() {
        let h = normalized_all(n - 1, xi / rho);
        for m in 0..n {
            proj[(m, j)] = w * h[m] * inv_scales[m] / rho;
        }
    }
    let t = Arc::new(proj * basis.synthesis());
    basis
        .transform_cache
        .write()
        .expect("transform cache poisoned")
        .insert(key, Arc::clone(&t));
    Ok(t)
}

/// Re-expresses an expansion in the basis with scaling factor `new_alpha`.
pub fn change_alpha_fc(basis: &HermiteBasis, exp: &Expansion, new_alpha: f64) -> Result<AlphaChange> {
    check_len(basis.n(), exp.coeffs.len())?;
    let t = alpha_change_matrix(basis, exp.alpha, new_alpha)?;
    let coeffs = &*t * DVector::from_column_slice(&exp.coeffs);
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::RepresentationRange);
    }
    let sv = t.as_ref().clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let ill_conditioned = condition > CONDITION_WARN;
    if ill_conditioned {
        log::warn!(
            "alpha change {} -> {} is ill-conditioned (cond ≈ {condition:.3e})",
            exp.alpha,
            new_alpha
        );
    }
    Ok(AlphaChange {
        expansion: Expansion {
            alpha: new_alpha,
            coeffs: coeffs.iter().copied().collect(),
        },
        condition,
        ill_conditioned,
    })
}

/// `p̃(ξ_j) = p(ξ_j) · exp((α_new² − α_old²) ξ_j²)`: the same physical
/// profile at the nodes, re-expressed against the new Gaussian.
pub fn rescale_point_values(
    basis: &HermiteBasis,
    p_old_at_nodes: &[f64],
    alpha_old: f64,
    alpha_new: f64,
) -> Result<Vec<f64>> {
    check_len(basis.n(), p_old_at_nodes.len())?;
    check_alpha(alpha_old)?;
    check_alpha(alpha_new)?;
    let delta = alpha_new * alpha_new - alpha_old * alpha_old;
    let max_sq = basis.nodes().iter().fold(0.0f64, |m, x| m.max(x * x));
    if delta * max_sq > MAX_RESCALE_EXPONENT {
        return Err(Error::AlphaJumpTooLarge {
            from: alpha_old,
            to: alpha_new,
        });
    }
    Ok(p_old_at_nodes
        .iter()
        .zip(basis.nodes())
        .map(|(p, xi)| p * (delta * xi * xi).exp())
        .collect())
}

/// `u_N(x) = p_N(x) e^{−α²x²}` on a grid, with `p_N` the barycentric
/// interpolant of the node values.
pub fn evaluate_hermite_function(p_at_nodes: &[f64], basis: &HermiteBasis, alpha: f64, x_grid: &[f64]) -> Vec<f64> {
    x_grid
        .iter()
        .map(|&x| basis.interpolate(p_at_nodes, x) * (-alpha * alpha * x * x).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pure_gaussian_is_mode_zero() {
        let b = HermiteBasis::new(10).unwrap();
        let nodal = NodalFunction::sample(&b, 1.0, |x| (-x * x).exp()).unwrap();
        let e = pv_to_fc(&b, &nodal).unwrap();
        assert_abs_diff_eq!(e.coeffs[0], 1.0, epsilon = 1e-10);
        for c in &e.coeffs[1..] {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-10);
        }
        let nodal = NodalFunction::sample(&b, 1.0, |x| 0.3 * (-x * x).exp()).unwrap();
        let e = pv_to_fc(&b, &nodal).unwrap();
        assert_abs_diff_eq!(e.coeffs[0], 0.3, epsilon = 1e-10);
    }

    #[test]
    fn first_moment_mode() {
        let b = HermiteBasis::new(8).unwrap();
        let nodal = NodalFunction::sample(&b, 1.0, |x| x * (-x * x).exp()).unwrap();
        let e = pv_to_fc(&b, &nodal).unwrap();
        for (m, c) in e.coeffs.iter().enumerate() {
            let expect = if m == 1 { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(*c, expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn synthesis_of_unit_and_zero_coefficients() {
        let b = HermiteBasis::new(6).unwrap();
        let mut c = vec![0.0; 6];
        let pv = fc_to_pv(&b, &Expansion { alpha: 1.0, coeffs: c.clone() }).unwrap();
        assert!(pv.values.iter().all(|v| *v == 0.0));
        c[0] = 1.0;
        let pv = fc_to_pv(&b, &Expansion { alpha: 1.0, coeffs: c }).unwrap();
        for v in pv.values {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn same_alpha_change_is_identity() {
        let b = HermiteBasis::new(12).unwrap();
        let coeffs: Vec<f64> = (0..12).map(|k| 1.0 / (1.0 + k as f64)).collect();
        let e = Expansion { alpha: 0.7, coeffs: coeffs.clone() };
        let out = change_alpha_fc(&b, &e, 0.7).unwrap();
        for (a, c) in out.expansion.coeffs.iter().zip(&coeffs) {
            assert_abs_diff_eq!(*a, *c, epsilon = 1e-10);
        }
        assert!(!out.ill_conditioned);
        let zero = Expansion { alpha: 0.7, coeffs: vec![0.0; 12] };
        let out = change_alpha_fc(&b, &zero, 1.1).unwrap();
        assert!(out.expansion.coeffs.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn transform_matrix_is_cached() {
        let b = HermiteBasis::new(8).unwrap();
        let t1 = alpha_change_matrix(&b, 0.8, 1.0).unwrap();
        let t2 = alpha_change_matrix(&b, 0.8, 1.0).unwrap();
        assert!(Arc::ptr_eq(&t1, &t2));
        let clone = b.clone();
        let t3 = alpha_change_matrix(&clone, 0.8, 1.0).unwrap();
        assert!(!Arc::ptr_eq(&t1, &t3));
        assert_eq!(*t1, *t3);
    }

    #[test]
    fn rescale_examples() {
        let b = HermiteBasis::new(4).unwrap();
        let p = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(rescale_point_values(&b, &p, 0.5, 0.5).unwrap(), p);
        let z = rescale_point_values(&b, &[0.0; 4], 0.5, 0.3).unwrap();
        assert!(z.iter().all(|v| *v == 0.0));

        // scalar check at ξ = 1 with a one-node-at-one surrogate
        let factor = ((0.3f64 * 0.3 - 0.5 * 0.5) * 1.0).exp();
        assert_abs_diff_eq!(factor, 0.852_143_788_966_211_2, epsilon = 1e-12);
        for (xi, v) in b.nodes().iter().zip(rescale_point_values(&b, &[1.0; 4], 0.5, 0.3).unwrap()) {
            assert_abs_diff_eq!(v, (-0.16 * xi * xi).exp(), epsilon = 1e-15);
        }
    }

    #[test]
    fn rescale_overflow_is_an_error() {
        let b = HermiteBasis::new(16).unwrap();
        let err = rescale_point_values(&b, &[1.0; 16], 0.1, 6.0).unwrap_err();
        assert!(matches!(err, Error::AlphaJumpTooLarge { .. }));
    }

    #[test]
    fn evaluate_constant_profile() {
        let b = HermiteBasis::new(6).unwrap();
        let grid: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.25).collect();
        let u = evaluate_hermite_function(&[2.5; 6], &b, 0.6, &grid);
        for (x, v) in grid.iter().zip(u) {
            assert_abs_diff_eq!(v, 2.5 * (-0.36 * x * x).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn evaluate_at_nodes_reproduces_samples() {
        let b = HermiteBasis::new(9).unwrap();
        let p: Vec<f64> = b.nodes().iter().map(|x| x * x).collect();
        let u = evaluate_hermite_function(&p, &b, 0.4, b.nodes());
        for (x, v) in b.nodes().iter().zip(u) {
            assert_abs_diff_eq!(v, x * x * (-0.16 * x * x).exp(), epsilon = 1e-12);
        }
    }
}
