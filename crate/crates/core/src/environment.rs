//! The pasture environment: a single replenishing resource stock shared by a
//! fixed set of energy-threshold agents.
//!
//! One step runs, in order: decide, gather, pay survival cost, death check,
//! replenish. Replenishment is proportional to the stock left after
//! consumption, so an exhausted stock stays exhausted.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};

/// Thresholds for the greedy-or-moderate scenarios.
pub const BINARY_THRESHOLDS: [f64; 2] = [50.0, 5000.0];
/// Thresholds for the scenarios with a range of moderate actions.
pub const RANGE_THRESHOLDS: [f64; 4] = [30.0, 50.0, 80.0, 5000.0];

/// Where replenishment happens relative to gathering within a step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepOrder {
    #[default]
    ConsumeThenReplenish,
    ReplenishThenConsume,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub num_agents: usize,
    pub initial_resource_per_agent: f64,
    /// Multiplier applied to the stock once per step.
    pub growth_rate: f64,
    /// Most a single agent can take in one step.
    pub max_gather: f64,
    /// Energy every living agent pays per step.
    pub survival_cost: f64,
    pub initial_energy: f64,
    /// Energy thresholds an agent chooses between, strictly increasing.
    pub thresholds: Vec<f64>,
    pub horizon: usize,
    pub step_order: StepOrder,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            num_agents: 1,
            initial_resource_per_agent: 500.0,
            growth_rate: 1.005,
            max_gather: 5.0,
            survival_cost: 2.0,
            initial_energy: 100.0,
            thresholds: BINARY_THRESHOLDS.to_vec(),
            horizon: 1000,
            step_order: StepOrder::ConsumeThenReplenish,
        }
    }
}

impl EnvConfig {
    pub fn binary(num_agents: usize, horizon: usize) -> Self {
        Self {
            num_agents,
            horizon,
            ..Self::default()
        }
    }

    pub fn range(num_agents: usize, horizon: usize) -> Self {
        Self {
            num_agents,
            horizon,
            thresholds: RANGE_THRESHOLDS.to_vec(),
            ..Self::default()
        }
    }

    pub fn num_thresholds(&self) -> usize {
        self.thresholds.len()
    }

    pub fn initial_resource(&self) -> f64 {
        self.initial_resource_per_agent * self.num_agents as f64
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.growth_rate) {
            return Err(config_err(format!(
                "growth_rate must be > 0, got {}",
                self.growth_rate
            )));
        }
        if !finite_pos(self.max_gather) {
            return Err(config_err(format!(
                "max_gather must be > 0, got {}",
                self.max_gather
            )));
        }
        if !(self.survival_cost.is_finite() && self.survival_cost >= 0.0) {
            return Err(config_err(format!(
                "survival_cost must be >= 0, got {}",
                self.survival_cost
            )));
        }
        if !(self.initial_resource_per_agent.is_finite() && self.initial_resource_per_agent >= 0.0)
        {
            return Err(config_err(format!(
                "initial_resource_per_agent must be >= 0, got {}",
                self.initial_resource_per_agent
            )));
        }
        if !finite_pos(self.initial_energy) {
            return Err(config_err(format!(
                "initial_energy must be > 0, got {}",
                self.initial_energy
            )));
        }
        if self.thresholds.is_empty() {
            return Err(config_err("thresholds must be non-empty"));
        }
        if let Some(t) = self.thresholds.iter().find(|t| !finite_pos(**t)) {
            return Err(config_err(format!("thresholds must all be > 0, got {t}")));
        }
        if self.thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err(format!(
                "thresholds must be strictly increasing, got {:?}",
                self.thresholds
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    pub energy: f64,
    pub alive: bool,
    pub last_choice: Option<usize>,
    pub gathered_last: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub resource: f64,
    pub step: usize,
    pub agents: Vec<AgentState>,
    pub rng_seed: u64,
}

impl EnvState {
    pub fn alive_count(&self) -> usize {
        self.agents.iter().filter(|a| a.alive).count()
    }
}

/// What happened during one call to [`Environment::step`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    /// Resource obtained per agent id (0 for agents that did not gather or are dead).
    pub gathered: Vec<f64>,
    /// Ids of agents that died this step.
    pub deaths: Vec<usize>,
    /// Number of agents that chose each threshold this step.
    pub choice_counts: Vec<usize>,
    /// Agents that wanted to gather.
    pub willing: usize,
    /// Agents that actually received a positive amount.
    pub gatherers: usize,
    /// Stock removed by gathering.
    pub removed: f64,
}

/// `true` when an agent at `energy` gathers under `threshold`.
pub fn wants_gather(energy: f64, threshold: f64) -> bool {
    energy < threshold
}

/// Splits `resource` among `gatherers` in a shuffled order, each taking up to
/// `max_gather` from what remains. The result is aligned with `gatherers`.
pub fn gather_allocation<R: Rng + ?Sized>(
    resource: f64,
    gatherers: &[usize],
    max_gather: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut order: Vec<usize> = (0..gatherers.len()).collect();
    order.shuffle(rng);
    let mut remaining = resource.max(0.0);
    let mut out = vec![0.0; gatherers.len()];
    for slot in order {
        let take = max_gather.min(remaining);
        out[slot] = take;
        remaining -= take;
    }
    out
}

#[derive(Clone, Debug)]
pub struct Environment {
    config: EnvConfig,
    state: EnvState,
}

impl Environment {
    /// Fresh environment: full stock, every agent alive at initial energy.
    pub fn new(config: EnvConfig, rng_seed: u64) -> Result<Self> {
        config.validate()?;
        let agents = (0..config.num_agents)
            .map(|id| AgentState {
                id,
                energy: config.initial_energy,
                alive: true,
                last_choice: None,
                gathered_last: 0.0,
            })
            .collect();
        let state = EnvState {
            resource: config.initial_resource(),
            step: 0,
            agents,
            rng_seed,
        };
        Ok(Self { config, state })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    /// Overwrites the stock. Used by tests and sensitivity checks.
    pub fn set_resource(&mut self, resource: f64) {
        self.state.resource = resource.max(0.0);
    }

    /// Advances one step. `choices[id]` must be `Some(threshold index)` for
    /// every living agent; entries for dead agents are ignored.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        choices: &[Option<usize>],
        rng: &mut R,
    ) -> Result<StepReport> {
        let k = self.config.num_thresholds();
        let n = self.state.agents.len();
        if choices.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: choices.len(),
            });
        }

        let mut report = StepReport {
            gathered: vec![0.0; n],
            choice_counts: vec![0; k],
            ..StepReport::default()
        };

        let mut willing = Vec::new();
        for agent in self.state.agents.iter().filter(|a| a.alive) {
            let choice = choices[agent.id].ok_or_else(|| Error::Choice {
                agent: agent.id,
                reason: "no choice for a living agent".into(),
            })?;
            if choice >= k {
                return Err(Error::Choice {
                    agent: agent.id,
                    reason: format!("index {choice} out of range for {k} thresholds"),
                });
            }
            report.choice_counts[choice] += 1;
            if wants_gather(agent.energy, self.config.thresholds[choice]) {
                willing.push(agent.id);
            }
        }
        report.willing = willing.len();

        if self.config.step_order == StepOrder::ReplenishThenConsume {
            self.state.resource *= self.config.growth_rate;
        }

        let shares = gather_allocation(self.state.resource, &willing, self.config.max_gather, rng);
        let mut remaining = self.state.resource;
        for (&id, &share) in willing.iter().zip(&shares) {
            report.gathered[id] = share;
            remaining -= share;
            if share > 0.0 {
                report.gatherers += 1;
            }
            self.state.agents[id].energy += share;
        }
        report.removed = self.state.resource - remaining;
        self.state.resource = remaining.max(0.0);

        for agent in self.state.agents.iter_mut().filter(|a| a.alive) {
            agent.energy -= self.config.survival_cost;
            agent.last_choice = choices[agent.id];
            agent.gathered_last = report.gathered[agent.id];
            if agent.energy <= 0.0 {
                agent.alive = false;
                report.deaths.push(agent.id);
            }
        }

        if self.config.step_order == StepOrder::ConsumeThenReplenish {
            self.state.resource *= self.config.growth_rate;
        }
        self.state.step += 1;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::env_rng;

    fn single(energy: f64) -> Environment {
        let mut env = Environment::new(EnvConfig::binary(1, 1000), 0).unwrap();
        env.state.agents[0].energy = energy;
        env
    }

    #[test]
    fn init_scales_with_agent_count() {
        let env = Environment::new(EnvConfig::binary(1, 1000), 0).unwrap();
        assert_eq!(env.state().resource, 500.0);
        assert_eq!(env.state().agents.len(), 1);
        assert_eq!(env.state().agents[0].energy, 100.0);

        let env = Environment::new(EnvConfig::binary(10, 1000), 0).unwrap();
        assert_eq!(env.state().resource, 5000.0);
        assert!(env.state().agents.iter().all(|a| a.alive && a.energy == 100.0));

        let env = Environment::new(EnvConfig::binary(0, 1000), 0).unwrap();
        assert_eq!(env.state().resource, 0.0);
        assert!(env.state().agents.is_empty());
    }

    #[test]
    fn invalid_config_names_the_bound() {
        let cases = [
            (EnvConfig { growth_rate: 0.0, ..EnvConfig::default() }, "growth_rate"),
            (EnvConfig { max_gather: -1.0, ..EnvConfig::default() }, "max_gather"),
            (EnvConfig { survival_cost: -0.5, ..EnvConfig::default() }, "survival_cost"),
            (EnvConfig { thresholds: vec![], ..EnvConfig::default() }, "non-empty"),
            (EnvConfig { thresholds: vec![50.0, 50.0], ..EnvConfig::default() }, "increasing"),
            (EnvConfig { thresholds: vec![0.0, 50.0], ..EnvConfig::default() }, "> 0"),
        ];
        for (cfg, needle) in cases {
            let err = Environment::new(cfg, 0).unwrap_err().to_string();
            assert!(err.contains(needle), "{err} should mention {needle}");
        }
    }

    #[test]
    fn gather_condition_is_strict() {
        assert!(wants_gather(40.0, 50.0));
        assert!(!wants_gather(50.0, 50.0));
        assert!(wants_gather(3100.0, 5000.0));
    }

    #[test]
    fn allocation_without_contention() {
        let mut rng = env_rng(1);
        let got = gather_allocation(100.0, &[0, 1, 2], 5.0, &mut rng);
        assert_eq!(got, vec![5.0, 5.0, 5.0]);
        assert_eq!(100.0 - got.iter().sum::<f64>(), 85.0);
    }

    #[test]
    fn allocation_under_contention_covers_both_orders() {
        let mut seen = [false, false];
        for seed in 0..64 {
            let mut rng = env_rng(seed);
            let got = gather_allocation(7.0, &[0, 1], 5.0, &mut rng);
            assert_eq!(got.iter().sum::<f64>(), 7.0);
            match (got[0], got[1]) {
                (a, b) if a == 5.0 && b == 2.0 => seen[0] = true,
                (a, b) if a == 2.0 && b == 5.0 => seen[1] = true,
                other => panic!("unexpected allocation {other:?}"),
            }
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn allocation_from_empty_stock() {
        let mut rng = env_rng(3);
        assert_eq!(gather_allocation(0.0, &[0, 1, 2, 3], 5.0, &mut rng), vec![0.0; 4]);
    }

    #[test]
    fn moderate_step_above_threshold() {
        let mut env = single(100.0);
        let mut rng = env_rng(0);
        let report = env.step(&[Some(0)], &mut rng).unwrap();
        assert_eq!(env.state().agents[0].energy, 98.0);
        assert_eq!(env.state().resource, 500.0 * 1.005);
        assert_eq!(report.gatherers, 0);
        assert_eq!(report.choice_counts, vec![1, 0]);
        assert_eq!(env.state().step, 1);
    }

    #[test]
    fn moderate_step_below_threshold() {
        let mut env = single(40.0);
        let mut rng = env_rng(0);
        let report = env.step(&[Some(0)], &mut rng).unwrap();
        assert_eq!(report.gathered, vec![5.0]);
        assert_eq!(env.state().agents[0].energy, 43.0);
        assert_eq!(env.state().resource, (500.0 - 5.0) * 1.005);
    }

    #[test]
    fn replenish_first_order() {
        let cfg = EnvConfig {
            step_order: StepOrder::ReplenishThenConsume,
            ..EnvConfig::default()
        };
        let mut env = Environment::new(cfg, 0).unwrap();
        let mut rng = env_rng(0);
        env.step(&[Some(1)], &mut rng).unwrap();
        assert_eq!(env.state().resource, 500.0 * 1.005 - 5.0);
    }

    #[test]
    fn greedy_agent_depletes_then_dies() {
        let mut env = single(100.0);
        let mut rng = env_rng(0);
        let mut expected = 500.0f64;
        let mut depleted_at = None;
        let mut died_at = None;
        for t in 0..1000 {
            if !env.state().agents[0].alive {
                break;
            }
            let report = env.step(&[Some(1)], &mut rng).unwrap();
            expected = (expected - 5.0f64.min(expected)) * 1.005;
            assert!((env.state().resource - expected).abs() <= 1e-9 * expected.max(1.0));
            if depleted_at.is_none() && env.state().resource == 0.0 {
                depleted_at = Some(t);
            }
            if !report.deaths.is_empty() {
                died_at = Some(t);
            }
        }
        let depleted_at = depleted_at.expect("stock never depleted");
        let died_at = died_at.expect("agent never died");
        assert!(depleted_at < died_at && died_at < 1000);
    }

    #[test]
    fn rejects_bad_choices() {
        let mut env = single(100.0);
        let mut rng = env_rng(0);
        assert!(matches!(
            env.step(&[Some(2)], &mut rng),
            Err(Error::Choice { agent: 0, .. })
        ));
        assert!(matches!(env.step(&[None], &mut rng), Err(Error::Choice { .. })));
        assert!(matches!(env.step(&[], &mut rng), Err(Error::Dimension { .. })));
    }

    #[test]
    fn dead_agents_never_act_again() {
        let mut env = single(1.0);
        let mut rng = env_rng(0);
        let report = env.step(&[Some(0)], &mut rng).unwrap();
        // 1 < 50 so it gathers 5, ends at 4; still alive.
        assert!(report.deaths.is_empty());
        env.state.agents[0].energy = 2.0;
        env.state.agents[0].last_choice = None;
        let r = env.step(&[Some(1)], &mut rng).unwrap();
        assert!(r.deaths.is_empty());
        env.state.agents[0].energy = 1.0;
        env.set_resource(0.0);
        let r = env.step(&[Some(1)], &mut rng).unwrap();
        assert_eq!(r.deaths, vec![0]);
        let energy = env.state().agents[0].energy;
        let r = env.step(&[None], &mut rng).unwrap();
        assert!(r.deaths.is_empty());
        assert_eq!(r.choice_counts, vec![0, 0]);
        assert_eq!(env.state().agents[0].energy, energy);
    }
}
