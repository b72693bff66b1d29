use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node count {0} outside the supported range 1..=200")]
    NodeCount(usize),

    #[error("root of H_{n} near {guess} did not converge")]
    RootSolve { n: usize, guess: f64 },

    #[error("quadrature weight {index} of H_{n} is not finite")]
    NonFiniteWeight { n: usize, index: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("scaling factor must be positive and finite, got {0}")]
    InvalidAlpha(f64),

    #[error("non-finite coefficients: profile exceeds the representable range of the basis")]
    RepresentationRange,

    #[error("alpha jump {from} -> {to} overflows the point-value rescaling")]
    AlphaJumpTooLarge { from: f64, to: f64 },

    #[error("solution diverged at step {step} (t = {t})")]
    Diverged { step: u64, t: f64 },

    #[error("odd Fourier mode {0} has no closed form (identically zero)")]
    OddMode(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(alpha)
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}
