use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::config::ExperimentConfig;
use crate::experiment::policy::AlphaPolicy;
use crate::hermite::HermiteBasis;
use crate::solver::{fine_grid, ErrorNorms, Problem, SpectralState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed { norms: ErrorNorms },
    Diverged { step: u64, t: f64, reason: String },
}

impl Outcome {
    pub fn norms(&self) -> Option<ErrorNorms> {
        match self {
            Outcome::Completed { norms } => Some(*norms),
            Outcome::Diverged { .. } => None,
        }
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self, Outcome::Diverged { .. })
    }
}

/// A learned α that fell outside the basis' admissible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClampEvent {
    pub t: f64,
    pub predicted: f64,
    pub used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub label: String,
    pub problem: Problem,
    pub n: usize,
    pub dt: f64,
    pub policy: String,
    pub outcome: Outcome,
    /// `(t, α)` at the start and at each update instant reached.
    pub alpha_trajectory: Vec<(f64, f64)>,
    pub clamps: Vec<ClampEvent>,
    /// Final-time samples `(x, u_N, u)` on the sup-norm grid; empty after
    /// divergence.
    pub snapshot: Vec<(f64, f64, f64)>,
    pub wall_seconds: f64,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let policy = AlphaPolicy::build(config)?;
    run_with_policy(config, policy)
}

/// Runs `config` with an already resolved policy; `config.policy` only
/// supplies the label.
pub fn run_with_policy(config: &ExperimentConfig, mut policy: AlphaPolicy) -> Result<ExperimentReport> {
    config.validate()?;
    let started = Instant::now();
    let problem = config.problem;
    let basis = Arc::new(HermiteBasis::new(config.n)?);
    let admissible = basis.admissible_alpha();
    let forcing = problem.forcing();
    let total = config.total_steps();

    let alpha0 = policy.initial_alpha();
    let mut state = SpectralState::new(basis.clone(), problem.initial_p(&basis, alpha0), alpha0, 0.0)?;
    let mut trajectory = vec![(0.0, alpha0)];
    let mut clamps = Vec::new();

    let learned = policy.is_learned();
    let mut update = |t: f64, state: &mut SpectralState, trajectory: &mut Vec<(f64, f64)>| -> Result<()> {
        let predicted = policy.next_alpha(t, state)?;
        let used = match (learned, predicted.is_finite()) {
            (false, _) => predicted,
            (true, true) => predicted.clamp(admissible.0, admissible.1),
            (true, false) => state.alpha(),
        };
        if used != predicted {
            log::warn!(
                "{}: α = {predicted} at t = {t} outside [{:.4}, {:.4}], using {used}",
                config.label,
                admissible.0,
                admissible.1
            );
            clamps.push(ClampEvent { t, predicted, used });
        }
        state.switch_alpha(used)?;
        trajectory.push((t, used));
        Ok(())
    };

    let result: Result<()> = (|| {
        if config.update_every_step {
            for k in 0..total {
                if k > 0 {
                    let t = k as f64 * config.dt;
                    update(t, &mut state, &mut trajectory)?;
                }
                state.run_segment(1, config.dt, forcing)?;
            }
            return Ok(());
        }
        let mut done = 0u64;
        for &tau in &config.update_instants() {
            let target = ((tau / config.dt).round() as u64).min(total);
            state.run_segment(target - done, config.dt, forcing)?;
            done = target;
            update(tau, &mut state, &mut trajectory)?;
        }
        state.run_segment(total - done, config.dt, forcing)
    })();

    let outcome = match result {
        Ok(()) => None,
        Err(Error::Diverged { step, t }) => Some(Outcome::Diverged {
            step,
            t,
            reason: "divergence threshold exceeded".into(),
        }),
        Err(Error::AlphaJumpTooLarge { from, to }) => Some(Outcome::Diverged {
            step: state.steps(),
            t: state.t(),
            reason: format!("scaling jump {from} -> {to} overflows the node values"),
        }),
        Err(e) => return Err(e),
    };

    let (outcome, snapshot) = match outcome {
        Some(o) => {
            log::info!("{}: run does not converge ({o:?})", config.label);
            (o, Vec::new())
        }
        None => {
            let t = config.t_final;
            let grid = fine_grid(config.n);
            let norms = state.error_norms(|x| problem.exact(x, t), &grid);
            let un = state.evaluate(&grid);
            let snapshot = grid
                .iter()
                .zip(un)
                .map(|(&x, u)| (x, u, problem.exact(x, t)))
                .collect();
            (Outcome::Completed { norms }, snapshot)
        }
    };

    Ok(ExperimentReport {
        label: config.label.clone(),
        problem,
        n: config.n,
        dt: config.dt,
        policy: config.policy.label(),
        outcome,
        alpha_trajectory: trajectory,
        clamps,
        snapshot,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}
