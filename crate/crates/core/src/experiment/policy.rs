use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::experiment::config::{CorpusSpec, ExperimentConfig, PolicySpec, RegressorKind};
use crate::hermite::HermiteBasis;
use crate::regress::{train_lsq, train_mlp, train_svr, ModelFile, RegressorModel, MODEL_SCHEMA_VERSION};
use crate::solver::{Problem, SpectralState};
use crate::training::{build_spline_corpus, fc_features, gen_gaussian_samples, CorpusPair, Representation};

/// Anything that maps a feature vector to a scaling factor.
pub trait AlphaPredictor: Send + Sync {
    fn predict_alpha(&self, features: &[f64]) -> Result<f64>;
}

impl AlphaPredictor for RegressorModel {
    fn predict_alpha(&self, features: &[f64]) -> Result<f64> {
        self.predict(features)
    }
}

impl<F> AlphaPredictor for F
where
    F: Fn(&[f64]) -> Result<f64> + Send + Sync,
{
    fn predict_alpha(&self, features: &[f64]) -> Result<f64> {
        self(features)
    }
}

/// Features of the current numerical solution in the given representation.
pub fn extract_features(state: &SpectralState, repr: Representation) -> Result<Vec<f64>> {
    let u = state.u_at_nodes();
    match repr {
        Representation::Pv => Ok(u),
        Representation::Fc => fc_features(state.basis(), &u),
    }
}

/// A policy ready to be queried during a run.
pub enum AlphaPolicy {
    ExactLaw(Problem),
    Constant(f64),
    Piecewise {
        times: Vec<f64>,
        values: Vec<f64>,
    },
    Random {
        interval: (f64, f64),
        rng: Box<ChaCha8Rng>,
        initial: Option<f64>,
    },
    Ml {
        predictor: Arc<dyn AlphaPredictor>,
        representation: Representation,
        /// Scaling factor at t = 0, before any solution features exist.
        initial: f64,
    },
}

impl std::fmt::Debug for AlphaPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlphaPolicy::ExactLaw(p) => write!(f, "ExactLaw({p:?})"),
            AlphaPolicy::Constant(a) => write!(f, "Constant({a})"),
            AlphaPolicy::Piecewise { times, values } => write!(f, "Piecewise({times:?}, {values:?})"),
            AlphaPolicy::Random { interval, .. } => write!(f, "Random({interval:?})"),
            AlphaPolicy::Ml { representation, .. } => write!(f, "Ml({representation})"),
        }
    }
}

impl AlphaPolicy {
    /// Resolves a spec, training a regressor when the spec asks for one.
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        let problem = config.problem;
        Ok(match &config.policy {
            PolicySpec::ExactLaw => AlphaPolicy::ExactLaw(problem),
            PolicySpec::Constant { alpha } => AlphaPolicy::Constant(*alpha),
            PolicySpec::Piecewise { times, values } => AlphaPolicy::Piecewise {
                times: times.clone(),
                values: values.clone(),
            },
            PolicySpec::Random {
                interval,
                seed,
                initial_alpha,
            } => AlphaPolicy::Random {
                interval: *interval,
                rng: Box::new(ChaCha8Rng::seed_from_u64(*seed)),
                initial: *initial_alpha,
            },
            PolicySpec::Ml {
                regressor,
                representation,
                model,
            } => {
                let file = match model {
                    Some(path) => {
                        let f = ModelFile::load(path)?;
                        if f.representation != *representation || f.n != config.n {
                            return Err(Error::Config(format!(
                                "model {} was trained for {} features with N = {}, run needs {} with N = {}",
                                path.display(),
                                f.representation,
                                f.n,
                                representation,
                                config.n
                            )));
                        }
                        f
                    }
                    None => {
                        let basis = HermiteBasis::new(config.n)?;
                        let corpus = build_corpus(&basis, &config.ml.corpus_for(problem), config.ml.corpus_seed)?;
                        train_model(*regressor, &corpus, *representation, config)?
                    }
                };
                AlphaPolicy::Ml {
                    predictor: Arc::new(file.model),
                    representation: *representation,
                    initial: problem.exact_alpha(0.0),
                }
            }
        })
    }

    /// Only learned predictions are clamped to the admissible interval.
    pub fn is_learned(&self) -> bool {
        matches!(self, AlphaPolicy::Ml { .. })
    }

    /// Scaling factor the run starts with.
    pub fn initial_alpha(&mut self) -> f64 {
        match self {
            AlphaPolicy::ExactLaw(p) => p.exact_alpha(0.0),
            AlphaPolicy::Constant(a) => *a,
            AlphaPolicy::Piecewise { values, .. } => values[0],
            AlphaPolicy::Random {
                interval,
                rng,
                initial,
            } => match initial {
                Some(a) => *a,
                None => draw(rng, *interval),
            },
            AlphaPolicy::Ml { initial, .. } => *initial,
        }
    }

    /// Scaling factor to switch to at time `t`, given the current state.
    pub fn next_alpha(&mut self, t: f64, state: &SpectralState) -> Result<f64> {
        match self {
            AlphaPolicy::ExactLaw(p) => Ok(p.exact_alpha(t)),
            AlphaPolicy::Constant(a) => Ok(*a),
            AlphaPolicy::Piecewise { times, values } => {
                let k = times.iter().rposition(|s| *s <= t + 1e-12).unwrap_or(0);
                Ok(values[k])
            }
            AlphaPolicy::Random { interval, rng, .. } => Ok(draw(rng, *interval)),
            AlphaPolicy::Ml {
                predictor,
                representation,
                ..
            } => {
                let features = extract_features(state, *representation)?;
                predictor.predict_alpha(&features)
            }
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, interval: (f64, f64)) -> f64 {
    interval.0 + (interval.1 - interval.0) * rng.gen::<f64>()
}

pub fn build_corpus(basis: &HermiteBasis, spec: &CorpusSpec, seed: u64) -> Result<CorpusPair> {
    match spec {
        CorpusSpec::Gaussian {
            count,
            a_range,
            h_range,
        } => gen_gaussian_samples(basis, *count, *a_range, *h_range, seed),
        CorpusSpec::Spline(p) => build_spline_corpus(basis, p, seed),
    }
}

/// Trains the requested regressor on one half of a corpus pair.
pub fn train_model(
    kind: RegressorKind,
    corpus: &CorpusPair,
    repr: Representation,
    config: &ExperimentConfig,
) -> Result<ModelFile> {
    let c = corpus.get(repr);
    let x = c.features();
    let y = c.targets();
    let model = match kind {
        RegressorKind::Svr => RegressorModel::Svr(train_svr(&x, &y, &config.ml.svr)?),
        RegressorKind::Mlp => {
            let (m, report) = train_mlp(&x, &y, &config.ml.mlp_params(config.problem), config.ml.mlp_seed)?;
            log::debug!(
                "network trained in {} epochs ({} restarts), final loss {:e}",
                report.epochs,
                report.restarts,
                report.loss_history.last().copied().unwrap_or(f64::NAN)
            );
            RegressorModel::Mlp(m)
        }
        RegressorKind::Lsq => RegressorModel::Lsq(train_lsq(&x, &y)?),
    };
    Ok(ModelFile {
        schema_version: MODEL_SCHEMA_VERSION,
        representation: repr,
        n: config.n,
        corpus_seed: c.seed,
        model,
    })
}
