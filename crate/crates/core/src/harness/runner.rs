use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use super::series::{aggregate, AggregateSeries, StepRecord, TimeSeries};
use crate::agents::{Agent, AgentContext, AgentRegistry};
use crate::environment::Environment;
use crate::error::{config_err, Result};
use crate::policy::build_observation;
use crate::rng::env_rng;

/// Learning signal handed to agents after each step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    /// Energy gained or lost this step, over the starting energy. On the
    /// death step the agent is taken to have lost all its remaining energy.
    #[default]
    EnergyChange,
    /// Energy after the step over the starting energy; 0 on the death step.
    EnergyLevel,
}

pub fn reward(kind: RewardKind, before: f64, after: f64, initial_energy: f64, died: bool) -> f64 {
    match kind {
        RewardKind::EnergyChange if died => -before / initial_energy,
        RewardKind::EnergyChange => (after - before) / initial_energy,
        RewardKind::EnergyLevel if died => 0.0,
        RewardKind::EnergyLevel => after / initial_energy,
    }
}

/// One closed-loop run of `scenario` with `seed`.
pub fn run_simulation(scenario: &Scenario, seed: u64, agents: &AgentRegistry) -> Result<TimeSeries> {
    scenario.validate(agents)?;
    let cfg = &scenario.env;
    let mut env = Environment::new(cfg.clone(), seed)?;
    let mut rng = env_rng(seed);
    let mut brains: Vec<Box<dyn Agent>> = (0..cfg.num_agents)
        .map(|agent_id| {
            let ctx = AgentContext {
                env: cfg,
                agent_id,
                run_seed: seed,
            };
            agents.build(&scenario.agent.kind, &ctx, &scenario.agent.params)
        })
        .collect::<Result<_>>()?;

    let mut series = TimeSeries::new(cfg.thresholds.clone());
    let mut last_report = None;
    let mut choices = vec![None; cfg.num_agents];
    for _ in 0..cfg.horizon {
        let obs = build_observation(env.state(), last_report.as_ref(), cfg, scenario.encoding);
        for (id, brain) in brains.iter_mut().enumerate() {
            choices[id] = if env.state().agents[id].alive {
                Some(brain.decide(&obs)?)
            } else {
                None
            };
        }
        let before: Vec<(bool, f64)> = env.state().agents.iter().map(|a| (a.alive, a.energy)).collect();
        let report = env.step(&choices, &mut rng)?;
        let state = env.state();
        for (id, brain) in brains.iter_mut().enumerate() {
            let (was_alive, energy) = before[id];
            if was_alive {
                let agent = &state.agents[id];
                let died = !agent.alive;
                let r = reward(scenario.reward, energy, agent.energy, cfg.initial_energy, died);
                brain.learn(r, died)?;
            }
        }

        let alive = state.alive_count();
        let energy_sum: f64 = state.agents.iter().filter(|a| a.alive).map(|a| a.energy).sum();
        series.records.push(StepRecord {
            step: state.step,
            resource: state.resource,
            alive,
            mean_energy: if alive > 0 { energy_sum / alive as f64 } else { 0.0 },
            gatherers: report.gatherers,
            deaths: report.deaths.len(),
            choice_counts: report.choice_counts.clone(),
        });
        last_report = Some(report);
        if scenario.stop_when_extinct && alive == 0 {
            break;
        }
    }
    Ok(series)
}

#[derive(Clone, Debug)]
pub struct BatchResult {
    pub runs: Vec<TimeSeries>,
    pub aggregate: AggregateSeries,
}

impl BatchResult {
    pub fn survival_fraction(&self) -> f64 {
        self.aggregate.survival_fraction()
    }
}

/// Runs seeds `base_seed + i` for `i in 0..num_runs` on `parallelism`
/// workers. Results are identical for any worker count.
pub fn run_batch(scenario: &Scenario, parallelism: usize, agents: &AgentRegistry) -> Result<BatchResult> {
    scenario.validate(agents)?;
    let seeds: Vec<u64> = (0..scenario.num_runs as u64)
        .map(|i| scenario.base_seed.wrapping_add(i))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| config_err(format!("cannot start worker pool: {e}")))?;
    let runs: Vec<TimeSeries> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| run_simulation(scenario, seed, agents))
            .collect::<Result<_>>()
    })?;
    let aggregate = aggregate(&runs)?;
    Ok(BatchResult { runs, aggregate })
}
