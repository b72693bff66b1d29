//! Synthetic training corpora for the scaling-factor regressors.

pub mod corpus;
pub mod labeling;
pub mod spline;

pub use corpus::{
    build_spline_corpus, fc_features, gaussian_sample, gen_gaussian_samples, read_corpus, spline_member,
    write_corpus, Corpus, CorpusPair, Representation, SplineCorpusParams, SplineMember, TrainingSample,
};
pub use labeling::{gamma_grid, is_unimodal, minimizing_hermite_function, GammaEvaluator, Labeling};
pub use spline::{gen_spline, CubicSpline};
