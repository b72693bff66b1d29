//! α-predictors: ν-SVR, a Levenberg–Marquardt network and the linear
//! least-squares baseline.

pub mod lsq;
pub mod mlp;
pub mod scaler;
pub mod svr;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::training::Representation;

pub use lsq::{train_lsq, LsqDiagnostics, LsqModel};
pub use mlp::{predict_mlp, train_mlp, LmReport, MlpModel, MlpParams};
pub use scaler::MinMaxScaler;
pub use svr::{predict_svr, train_svr, SvrModel, SvrParams};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RegressorModel {
    Svr(SvrModel),
    Mlp(MlpModel),
    Lsq(LsqModel),
}

impl RegressorModel {
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        match self {
            RegressorModel::Svr(m) => m.predict(features),
            RegressorModel::Mlp(m) => m.predict(features),
            RegressorModel::Lsq(m) => m.predict(features),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RegressorModel::Svr(_) => "svr",
            RegressorModel::Mlp(_) => "mlp",
            RegressorModel::Lsq(_) => "lsq",
        }
    }
}

/// Model plus the feature convention it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub representation: Representation,
    pub n: usize,
    pub corpus_seed: u64,
    pub model: RegressorModel,
}

impl ModelFile {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::parse(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
        if file.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::parse(
                path,
                format!("unsupported model schema version {}", file.schema_version),
            ));
        }
        Ok(file)
    }
}
