//! Linear least-squares map from features to α, kept as a diagnostic
//! baseline: on spline corpora its Gram matrix is singular.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsqDiagnostics {
    /// Numerical rank of the feature matrix (equal to that of its Gram matrix).
    pub rank: usize,
    pub n_features: usize,
    pub rank_deficient: bool,
    /// `log10 |det(VᵀV)|`; `−∞` when a singular value is exactly zero.
    #[serde(with = "extended_f64")]
    pub gram_log10_det: f64,
    pub singular_values: Vec<f64>,
}

/// JSON has no infinities; non-finite values travel as strings.
mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            Repr::Num(*v)
        } else {
            Repr::Text(v.to_string())
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsqModel {
    pub weights: Vec<f64>,
    pub diagnostics: LsqDiagnostics,
}

/// Minimum-norm minimizer of `Σ_k (V_k · W − α_k)²` via the SVD of `V`.
pub fn train_lsq(features: &[Vec<f64>], targets: &[f64]) -> Result<LsqModel> {
    let k = features.len();
    if k == 0 {
        return Err(Error::Training("empty corpus".into()));
    }
    check_len(k, targets.len())?;
    let n = features[0].len();
    for f in features {
        check_len(n, f.len())?;
    }
    let v = DMatrix::from_fn(k, n, |i, j| features[i][j]);
    let svd = v.clone().svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smax = sv.first().copied().unwrap_or(0.0);
    let tol = k.max(n) as f64 * f64::EPSILON * smax;
    let rank = sv.iter().filter(|s| **s > tol).count();
    let gram_log10_det = if sv.len() < n {
        f64::NEG_INFINITY
    } else {
        sv.iter().map(|s| 2.0 * s.log10()).sum()
    };
    let w = svd
        .solve(&DVector::from_column_slice(targets), tol)
        .map_err(|e| Error::Training(e.to_string()))?;
    Ok(LsqModel {
        weights: w.iter().copied().collect(),
        diagnostics: LsqDiagnostics {
            rank,
            n_features: n,
            rank_deficient: rank < n,
            gram_log10_det,
            singular_values: sv,
        },
    })
}

impl LsqModel {
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        check_len(self.weights.len(), features.len())?;
        Ok(self.weights.iter().zip(features).map(|(w, v)| w * v).sum())
    }
}
