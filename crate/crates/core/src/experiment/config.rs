use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regress::{MlpParams, SvrParams};
use crate::solver::Problem;
use crate::training::{Representation, SplineCorpusParams};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

fn default_schema() -> u32 {
    CONFIG_SCHEMA_VERSION
}

fn default_t_final() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressorKind {
    Svr,
    Mlp,
    Lsq,
}

impl RegressorKind {
    pub fn label(self) -> &'static str {
        match self {
            RegressorKind::Svr => "svr",
            RegressorKind::Mlp => "mlp",
            RegressorKind::Lsq => "lsq",
        }
    }
}

impl FromStr for RegressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svr" | "svm" => Ok(RegressorKind::Svr),
            "mlp" | "dl" | "nn" => Ok(RegressorKind::Mlp),
            "lsq" => Ok(RegressorKind::Lsq),
            _ => Err(Error::InvalidArgument(format!("unknown regressor `{s}` (expected svr, mlp or lsq)"))),
        }
    }
}

/// How α is chosen at update instants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    /// The exact solution's own α(t).
    ExactLaw,
    Constant {
        alpha: f64,
    },
    /// `values[i]` applies from `times[i]` on; `times[0]` must be 0.
    Piecewise {
        times: Vec<f64>,
        values: Vec<f64>,
    },
    /// Uniform draws at t = 0 and at every update instant.
    Random {
        interval: (f64, f64),
        seed: u64,
        #[serde(default)]
        initial_alpha: Option<f64>,
    },
    /// Regressor queried on features of the current solution.
    Ml {
        regressor: RegressorKind,
        representation: Representation,
        #[serde(default)]
        model: Option<PathBuf>,
    },
}

impl PolicySpec {
    pub fn label(&self) -> String {
        match self {
            PolicySpec::ExactLaw => "exact".into(),
            PolicySpec::Constant { alpha } => format!("constant {alpha}"),
            PolicySpec::Piecewise { .. } => "piecewise".into(),
            PolicySpec::Random { interval, .. } => format!("random [{}, {}]", interval.0, interval.1),
            PolicySpec::Ml {
                regressor,
                representation,
                ..
            } => format!("{}-{}", regressor.label(), representation.label()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self {
            PolicySpec::ExactLaw | PolicySpec::Ml { .. } => Ok(()),
            PolicySpec::Constant { alpha } if !(alpha.is_finite() && *alpha > 0.0) => {
                bad(format!("constant alpha must be positive, got {alpha}"))
            }
            PolicySpec::Constant { .. } => Ok(()),
            PolicySpec::Piecewise { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return bad("piecewise policy needs matching non-empty times and values".into());
                }
                if times[0] != 0.0 {
                    return bad("piecewise policy must start at t = 0".into());
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("piecewise times must be strictly increasing".into());
                }
                if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return bad("piecewise values must be positive".into());
                }
                Ok(())
            }
            PolicySpec::Random {
                interval,
                initial_alpha,
                ..
            } => {
                if !(interval.0 > 0.0 && interval.0 <= interval.1 && interval.1.is_finite()) {
                    return bad(format!("invalid random interval {interval:?}"));
                }
                if let Some(a) = initial_alpha {
                    if !(a.is_finite() && *a > 0.0) {
                        return bad(format!("initial alpha must be positive, got {a}"));
                    }
                }
                Ok(())
            }
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    /// `exact`, `constant:A`, `random:LO:HI[:SEED]`,
    /// `piecewise:T0=A0,T1=A1,…`, or `<svr|mlp|lsq>-<pv|fc>`.
    fn from_str(s: &str) -> Result<Self> {
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad number `{v}` in policy `{s}`")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let spec = match parts.as_slice() {
            ["exact"] => PolicySpec::ExactLaw,
            ["constant", a] => PolicySpec::Constant { alpha: num(a)? },
            ["random", lo, hi] => PolicySpec::Random {
                interval: (num(lo)?, num(hi)?),
                seed: 0,
                initial_alpha: None,
            },
            ["random", lo, hi, seed] => PolicySpec::Random {
                interval: (num(lo)?, num(hi)?),
                seed: seed
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad seed in policy `{s}`")))?,
                initial_alpha: None,
            },
            ["piecewise", list] => {
                let mut times = Vec::new();
                let mut values = Vec::new();
                for item in list.split(',') {
                    let (t, a) = item
                        .split_once('=')
                        .ok_or_else(|| Error::InvalidArgument(format!("expected T=A in `{item}`")))?;
                    times.push(num(t)?);
                    values.push(num(a)?);
                }
                PolicySpec::Piecewise { times, values }
            }
            [ml] if ml.contains('-') => {
                let (r, p) = ml.split_once('-').unwrap();
                PolicySpec::Ml {
                    regressor: r.parse()?,
                    representation: p.parse()?,
                    model: None,
                }
            }
            _ => return Err(Error::InvalidArgument(format!("unrecognized policy `{s}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum CorpusSpec {
    Gaussian {
        count: usize,
        a_range: (f64, f64),
        h_range: (f64, f64),
    },
    Spline(SplineCorpusParams),
}

impl CorpusSpec {
    pub fn default_for(problem: Problem) -> Self {
        match problem {
            Problem::Homogeneous => CorpusSpec::Gaussian {
                count: 40,
                a_range: (0.2, 0.6),
                h_range: (0.0, 1.0),
            },
            Problem::Nonhomogeneous => CorpusSpec::Spline(SplineCorpusParams::default()),
        }
    }
}

/// Corpus and regressor settings used when a policy needs a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlSettings {
    pub corpus: Option<CorpusSpec>,
    pub corpus_seed: u64,
    pub svr: SvrParams,
    /// Hidden widths; `None` picks 20-10 (homogeneous) or 5-5 (forced).
    pub mlp_hidden: Option<Vec<usize>>,
    pub mlp_max_epochs: usize,
    pub mlp_target_mse: f64,
    pub mlp_seed: u64,
}

impl Default for MlSettings {
    fn default() -> Self {
        let mlp = MlpParams::default();
        Self {
            corpus: None,
            corpus_seed: 1,
            svr: SvrParams::default(),
            mlp_hidden: None,
            mlp_max_epochs: mlp.max_epochs,
            mlp_target_mse: mlp.target_mse,
            mlp_seed: 1,
        }
    }
}

impl MlSettings {
    pub fn corpus_for(&self, problem: Problem) -> CorpusSpec {
        self.corpus.clone().unwrap_or_else(|| CorpusSpec::default_for(problem))
    }

    pub fn mlp_params(&self, problem: Problem) -> MlpParams {
        let hidden = self.mlp_hidden.clone().unwrap_or_else(|| match problem {
            Problem::Homogeneous => vec![20, 10],
            Problem::Nonhomogeneous => vec![5, 5],
        });
        MlpParams {
            hidden,
            max_epochs: self.mlp_max_epochs,
            target_mse: self.mlp_target_mse,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.corpus_seed = seed;
        self.mlp_seed = seed;
    }
}

/// Update instants: t = 0.1, …, 0.9 and, for the homogeneous problem, a last
/// one at the final time.
pub fn default_update_times(problem: Problem, t_final: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (1..10).map(|k| k as f64 * 0.1 * t_final).collect();
    if problem == Problem::Homogeneous {
        v.push(t_final);
    }
    v
}

/// A single solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub label: String,
    pub problem: Problem,
    pub n: usize,
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    pub policy: PolicySpec,
    /// `None` selects [`default_update_times`].
    #[serde(default)]
    pub update_times: Option<Vec<f64>>,
    /// Query the policy before every Euler step instead of at instants.
    #[serde(default)]
    pub update_every_step: bool,
    #[serde(default)]
    pub ml: MlSettings,
}

impl ExperimentConfig {
    pub fn new(problem: Problem, n: usize, dt: f64, policy: PolicySpec) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            label: policy.label(),
            problem,
            n,
            dt,
            t_final: 1.0,
            policy,
            update_times: None,
            update_every_step: false,
            ml: MlSettings::default(),
        }
    }

    pub fn update_instants(&self) -> Vec<f64> {
        self.update_times
            .clone()
            .unwrap_or_else(|| default_update_times(self.problem, self.t_final))
    }

    pub fn total_steps(&self) -> u64 {
        (self.t_final / self.dt).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.n < 2 || self.n > crate::hermite::MAX_NODES {
            return Err(Error::Config(format!("n must lie in 2..=200, got {}", self.n)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::Config(format!("t_final must be positive, got {}", self.t_final)));
        }
        let steps = self.total_steps() as f64;
        if ((steps * self.dt - self.t_final) / self.t_final).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "t_final = {} is not a whole number of steps of dt = {}",
                self.t_final, self.dt
            )));
        }
        let inst = self.update_instants();
        if inst.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("update times must be strictly increasing".into()));
        }
        if inst.iter().any(|t| !(*t > 0.0 && *t <= self.t_final)) {
            return Err(Error::Config("update times must lie in (0, t_final]".into()));
        }
        self.policy.validate()
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::parse(origin, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableId {
    Table1,
    Table2,
    Table3,
    Table4,
    Table5,
    Table6,
}

impl TableId {
    pub const ALL: [TableId; 6] = [
        TableId::Table1,
        TableId::Table2,
        TableId::Table3,
        TableId::Table4,
        TableId::Table5,
        TableId::Table6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableId::Table1 => "table1",
            TableId::Table2 => "table2",
            TableId::Table3 => "table3",
            TableId::Table4 => "table4",
            TableId::Table5 => "table5",
            TableId::Table6 => "table6",
        }
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown table `{s}` (expected table1..table6)")))
    }
}

/// One row of a table: everything except the time step, which the table
/// supplies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub label: String,
    pub problem: Problem,
    pub n: usize,
    pub policy: PolicySpec,
    #[serde(default)]
    pub update_times: Option<Vec<f64>>,
    #[serde(default)]
    pub t_final: Option<f64>,
}

/// A full table: shared settings plus its runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub table: TableId,
    /// Desk-scale time step.
    pub dt: f64,
    /// Time step of the published runs.
    pub paper_dt: f64,
    #[serde(default)]
    pub ml: MlSettings,
    pub runs: Vec<RunSpec>,
}

impl TableConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::parse(origin, e))?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema_version {}", cfg.schema_version)));
        }
        Ok(cfg)
    }

    /// Seeds every random consumer (corpus, network, random policies) from
    /// one value.
    pub fn set_seed(&mut self, seed: u64) {
        self.ml.set_seed(seed);
        for r in &mut self.runs {
            if let PolicySpec::Random { seed: s, .. } = &mut r.policy {
                *s = seed;
            }
        }
    }

    /// Fully specified runs at time step `dt`.
    pub fn experiments(&self, dt: f64) -> Result<Vec<ExperimentConfig>> {
        self.runs
            .iter()
            .map(|r| {
                let cfg = ExperimentConfig {
                    schema_version: CONFIG_SCHEMA_VERSION,
                    label: r.label.clone(),
                    problem: r.problem,
                    n: r.n,
                    dt,
                    t_final: r.t_final.unwrap_or(1.0),
                    policy: r.policy.clone(),
                    update_times: r.update_times.clone(),
                    update_every_step: false,
                    ml: self.ml.clone(),
                };
                cfg.validate()?;
                Ok(cfg)
            })
            .collect()
    }
}
