//! Driving the solver with an α policy and reproducing the result tables.

pub mod config;
pub mod policy;
pub mod run;
pub mod tables;

pub use config::{
    default_update_times, CorpusSpec, ExperimentConfig, MlSettings, PolicySpec, RegressorKind, RunSpec,
    TableConfig, TableId, CONFIG_SCHEMA_VERSION,
};
pub use policy::{build_corpus, extract_features, train_model, AlphaPolicy, AlphaPredictor};
pub use run::{run_experiment, run_with_policy, ClampEvent, ExperimentReport, Outcome};
pub use tables::{emit_tables, norms_csv, render_report, reproduce, trajectory_csv, StepChoice, DIVERGED_LABEL};
