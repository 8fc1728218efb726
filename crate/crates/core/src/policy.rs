//! Observations, threshold actions and the fixed baseline policies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{EnvConfig, EnvState, StepReport};
use crate::error::{config_err, Result};

/// How raw counts are scaled before reaching a network.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    /// Divide by the initial totals.
    #[default]
    Normalized,
    /// Pass raw stock and counts through.
    Raw,
}

/// What every agent sees before deciding. All agents see the same values.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub resource: f64,
    pub alive: f64,
    /// Agents that actually received resource last step.
    pub gathering: f64,
    /// Agents that chose each threshold last step.
    pub threshold_counts: Vec<f64>,
}

impl Observation {
    pub fn dim(&self) -> usize {
        3 + self.threshold_counts.len()
    }

    /// Network input layout: resource, alive, gathering, then one entry per threshold.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.resource);
        v.push(self.alive);
        v.push(self.gathering);
        v.extend_from_slice(&self.threshold_counts);
        v
    }
}

pub fn observation_dim(config: &EnvConfig) -> usize {
    3 + config.num_thresholds()
}

/// Builds the observation for the coming step. `last` is the report of the
/// step just taken, `None` before the first step.
pub fn build_observation(
    state: &EnvState,
    last: Option<&StepReport>,
    config: &EnvConfig,
    encoding: Encoding,
) -> Observation {
    let k = config.num_thresholds();
    let alive = state.alive_count() as f64;
    let (gathering, counts) = match last {
        Some(r) => (
            r.gatherers as f64,
            r.choice_counts.iter().map(|&c| c as f64).collect(),
        ),
        None => (0.0, vec![0.0; k]),
    };
    match encoding {
        Encoding::Raw => Observation {
            resource: state.resource,
            alive,
            gathering,
            threshold_counts: counts,
        },
        Encoding::Normalized => {
            let n = config.num_agents.max(1) as f64;
            let r0 = config.initial_resource();
            Observation {
                resource: if r0 > 0.0 { state.resource / r0 } else { 0.0 },
                alive: alive / n,
                gathering: gathering / n,
                threshold_counts: counts.into_iter().map(|c| c / n).collect(),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionChoice {
    pub index: usize,
    pub threshold: f64,
}

impl ActionChoice {
    pub fn new(index: usize, config: &EnvConfig) -> Option<Self> {
        config.thresholds.get(index).map(|&threshold| Self { index, threshold })
    }

    /// The largest threshold is the greedy action.
    pub fn is_greedy(&self, config: &EnvConfig) -> bool {
        self.index + 1 == config.num_thresholds()
    }
}

/// Index of the greedy action (the largest threshold).
pub fn greedy_index(config: &EnvConfig) -> usize {
    config.num_thresholds().saturating_sub(1)
}

/// Index of the largest score, ties broken uniformly at random.
pub fn argmax_random_tie<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> usize {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == max).collect();
    match ties.len() {
        0 => 0,
        1 => ties[0],
        n => ties[rng.random_range(0..n)],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    Moderate,
    Greedy,
}

pub const DEFAULT_MODERATE_THRESHOLD: f64 = 50.0;

/// The fixed choice a baseline agent makes every step.
pub fn baseline_policy(
    kind: BaselineKind,
    config: &EnvConfig,
    moderate_threshold: f64,
) -> Result<ActionChoice> {
    let index = match kind {
        BaselineKind::Greedy => greedy_index(config),
        BaselineKind::Moderate => config
            .thresholds
            .iter()
            .position(|&t| t == moderate_threshold)
            .ok_or_else(|| {
                config_err(format!(
                    "moderate threshold {moderate_threshold} not among {:?}",
                    config.thresholds
                ))
            })?,
    };
    ActionChoice::new(index, config).ok_or_else(|| config_err("no thresholds configured"))
}
