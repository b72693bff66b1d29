use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Clamped cubic spline on `[−c, c]` with equispaced break points, zero value
/// and zero slope at both ends, extended by zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    c: f64,
    h: f64,
    // values at all M+2 break points, ends included
    y: Vec<f64>,
    // second derivatives at the break points
    moments: Vec<f64>,
}

impl CubicSpline {
    /// Spline through `interior` values at the `M` interior break points.
    pub fn clamped(c: f64, interior: &[f64]) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!("support half-width must be positive, got {c}")));
        }
        if interior.is_empty() {
            return Err(Error::InvalidArgument("spline needs at least one interior break point".into()));
        }
        let m = interior.len();
        let h = 2.0 * c / (m + 1) as f64;
        let mut y = Vec::with_capacity(m + 2);
        y.push(0.0);
        y.extend_from_slice(interior);
        y.push(0.0);

        let n = y.len();
        let mut sub = vec![h; n];
        let mut diag = vec![4.0 * h; n];
        let sup = vec![h; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0 * h;
        diag[n - 1] = 2.0 * h;
        rhs[0] = 6.0 * (y[1] - y[0]) / h;
        rhs[n - 1] = -6.0 * (y[n - 1] - y[n - 2]) / h;
        for i in 1..n - 1 {
            rhs[i] = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
        }
        sub[0] = 0.0;
        let moments = thomas(&sub, &mut diag, &sup, &mut rhs);
        Ok(Self { c, h, y, moments })
    }

    pub fn support_halfwidth(&self) -> f64 {
        self.c
    }

    pub fn break_points(&self) -> Vec<f64> {
        (0..self.y.len()).map(|i| -self.c + self.h * i as f64).collect()
    }

    pub fn interior_values(&self) -> &[f64] {
        &self.y[1..self.y.len() - 1]
    }

    fn locate(&self, x: f64) -> Option<(usize, f64, f64)> {
        if !(x > -self.c && x < self.c) {
            return None;
        }
        let s = (x + self.c) / self.h;
        let i = (s.floor() as usize).min(self.y.len() - 2);
        let xi = -self.c + self.h * i as f64;
        let a = (xi + self.h - x) / self.h;
        let b = (x - xi) / self.h;
        Some((i, a, b))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let Some((i, a, b)) = self.locate(x) else {
            return 0.0;
        };
        let h2 = self.h * self.h / 6.0;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.moments[i] + (b * b * b - b) * self.moments[i + 1]) * h2
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let Some((i, a, b)) = self.locate(x) else {
            return 0.0;
        };
        (self.y[i + 1] - self.y[i]) / self.h
            + self.h / 6.0
                * (-(3.0 * a * a - 1.0) * self.moments[i] + (3.0 * b * b - 1.0) * self.moments[i + 1])
    }

    /// One-sided slope at a break point from inside `[−c, c]`.
    pub fn end_slopes(&self) -> (f64, f64) {
        let n = self.y.len();
        let left = (self.y[1] - self.y[0]) / self.h - self.h / 6.0 * (2.0 * self.moments[0] + self.moments[1]);
        let right =
            (self.y[n - 1] - self.y[n - 2]) / self.h + self.h / 6.0 * (self.moments[n - 2] + 2.0 * self.moments[n - 1]);
        (left, right)
    }

    pub fn max_value(&self) -> f64 {
        self.y.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Thomas algorithm for a tridiagonal system; `sub[0]` and the last `sup`
/// entry are ignored. `diag` and `rhs` are overwritten.
fn thomas(sub: &[f64], diag: &mut [f64], sup: &[f64], rhs: &mut [f64]) -> Vec<f64> {
    let n = diag.len();
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut x = vec![0.0; n];
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
    }
    x
}

/// Random clamped spline: `m_interior` interior values uniform in
/// `[0, value_cap]`.
pub fn gen_spline(c: f64, m_interior: usize, value_cap: f64, rng_seed: u64) -> Result<CubicSpline> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    spline_from_rng(&mut rng, c, m_interior, value_cap)
}

pub(crate) fn spline_from_rng(rng: &mut impl Rng, c: f64, m_interior: usize, value_cap: f64) -> Result<CubicSpline> {
    if !(value_cap.is_finite() && value_cap >= 0.0) {
        return Err(Error::InvalidArgument(format!("value cap must be non-negative, got {value_cap}")));
    }
    let values: Vec<f64> = (0..m_interior).map(|_| rng.gen::<f64>() * value_cap).collect();
    CubicSpline::clamped(c, &values)
}
