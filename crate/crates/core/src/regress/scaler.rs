use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Features whose spread is below this fraction of the largest feature
/// magnitude are treated as constant and mapped to 0.
pub const FLAT_FEATURE_RATIO: f64 = 1e-9;

/// Per-feature affine map of the training range onto `[−1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// `false` for features treated as constant.
    pub active: Vec<bool>,
}

impl MinMaxScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Training("empty corpus".into()))?;
        let d = first.len();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for r in rows {
            check_len(d, r.len())?;
            for (k, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Training(format!("non-finite feature {k}")));
                }
                min[k] = min[k].min(v);
                max[k] = max[k].max(v);
            }
        }
        let scale = min
            .iter()
            .chain(&max)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let active = min
            .iter()
            .zip(&max)
            .map(|(lo, hi)| hi - lo > FLAT_FEATURE_RATIO * scale)
            .collect();
        Ok(Self { min, max, active })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        Ok(x.iter()
            .enumerate()
            .map(|(k, &v)| {
                if self.active[k] {
                    2.0 * (v - self.min[k]) / (self.max[k] - self.min[k]) - 1.0
                } else {
                    0.0
                }
            })
            .collect())
    }

    /// Inverse map; constant features come back as their training midpoint.
    pub fn inverse(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), z.len())?;
        Ok(z.iter()
            .enumerate()
            .map(|(k, &v)| {
                if self.active[k] {
                    self.min[k] + 0.5 * (v + 1.0) * (self.max[k] - self.min[k])
                } else {
                    0.5 * (self.min[k] + self.max[k])
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_range_to_unit_box() {
        let rows = vec![vec![1.0, -3.0], vec![3.0, 5.0], vec![2.0, 1.0]];
        let s = MinMaxScaler::fit(&rows).unwrap();
        assert_eq!(s.transform(&[1.0, -3.0]).unwrap(), vec![-1.0, -1.0]);
        assert_eq!(s.transform(&[3.0, 5.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(s.transform(&[2.0, 1.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn flat_features_are_zeroed() {
        let rows = vec![vec![1.0, 1e-17], vec![0.5, -2e-17]];
        let s = MinMaxScaler::fit(&rows).unwrap();
        assert_eq!(s.active, vec![true, false]);
        assert_eq!(s.transform(&[0.7, 5e-17]).unwrap()[1], 0.0);
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(MinMaxScaler::fit(&[]).is_err());
        assert!(MinMaxScaler::fit(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
