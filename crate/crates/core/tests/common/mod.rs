#![allow(dead_code)]

use std::path::PathBuf;

/// Integer coefficients of `H_n` in the monomial basis, lowest degree first.
pub fn hermite_coeffs(n: usize) -> Vec<i128> {
    let mut prev = vec![1i128];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0i128, 2];
    for k in 1..n {
        let mut next = vec![0i128; k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= 2 * k as i128 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Value and magnitude scale `Σ |c_k x^k|` of a monomial-basis polynomial.
pub fn poly_eval(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut s = 0.0;
    let mut p = 1.0;
    for c in coeffs {
        v += c * p;
        s += (c * p).abs();
        p *= x;
    }
    (v, s)
}

pub fn as_f64(c: &[i128]) -> Vec<f64> {
    c.iter().map(|&v| v as f64).collect()
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect()
}

/// `∫ x^k e^{−x²} dx`: zero for odd `k`, `Γ((k+1)/2)` otherwise.
pub fn gaussian_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let mut m = std::f64::consts::PI.sqrt();
    for i in 0..k / 2 {
        m *= (2 * i + 1) as f64 / 2.0;
    }
    m
}

/// Composite trapezoid rule; spectrally accurate for smooth integrands that
/// decay to zero at both ends.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + i as f64 * h);
    }
    s * h
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

pub fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}
