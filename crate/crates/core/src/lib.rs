//! Adaptive Hermite spectral collocation for the heat equation on the real
//! line, with the Gaussian scaling factor chosen by trained regressors.
//!
//! Module map:
//! - [`hermite`]: polynomials, Gauss–Hermite rule, differentiation matrices
//! - [`transform`]: point values ↔ Fourier coefficients, α changes
//! - [`solver`]: collocation time stepping, Galerkin reference, exact solutions
//! - [`training`]: Gaussian and spline corpora, minimizing Hermite functions
//! - [`regress`]: ν-SVR, Levenberg–Marquardt MLP, least-squares baseline
//! - [`experiment`]: α policies, experiment runner, table reproduction

pub mod error;
pub mod exec;
pub mod experiment;
pub mod hermite;
pub mod regress;
pub mod solver;
pub mod training;
pub mod transform;

pub use error::{Error, Result};
pub use hermite::HermiteBasis;
pub use solver::SpectralState;
pub use transform::{Expansion, NodalFunction};
