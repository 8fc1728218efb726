//! Named experiment setups and the figure bundles built from them.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::runner::RewardKind;
use crate::agents::AgentRegistry;
use crate::environment::EnvConfig;
use crate::error::{config_err, Error, Result};
use crate::policy::Encoding;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    /// Registered agent kind, e.g. `"ne"` or `"lstm-drqn"`.
    pub kind: String,
    /// Learner parameters passed to the kind's builder.
    #[serde(default)]
    pub params: Value,
}

impl AgentSpec {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            params: Value::Object(Default::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub env: EnvConfig,
    pub agent: AgentSpec,
    pub num_runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub encoding: Encoding,
    #[serde(default)]
    pub reward: RewardKind,
    /// Stop a run once every agent is dead instead of running the full horizon.
    #[serde(default)]
    pub stop_when_extinct: bool,
}

impl Scenario {
    pub fn horizon(&self) -> usize {
        self.env.horizon
    }

    pub fn validate(&self, agents: &AgentRegistry) -> Result<()> {
        self.env.validate()?;
        if self.num_runs == 0 {
            return Err(config_err("num_runs must be >= 1"));
        }
        if !agents.contains(&self.agent.kind) {
            return Err(Error::UnknownAgent(self.agent.kind.clone()));
        }
        Ok(())
    }

    pub fn with_runs(mut self, runs: usize) -> Self {
        self.num_runs = runs;
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.env.horizon = horizon;
        self
    }
}

fn scenario(
    name: &str,
    description: &str,
    env: EnvConfig,
    kind: &str,
    num_runs: usize,
) -> Scenario {
    Scenario {
        name: name.to_string(),
        description: description.to_string(),
        env,
        agent: AgentSpec::new(kind),
        num_runs,
        base_seed: 0,
        encoding: Encoding::Normalized,
        reward: RewardKind::default(),
        stop_when_extinct: false,
    }
}

/// Every built-in scenario.
pub fn builtin_scenarios() -> Vec<Scenario> {
    use EnvConfig as E;
    vec![
        scenario("baseline-moderate-1", "one agent, always threshold 50", E::binary(1, 1000), "baseline-moderate", 100),
        scenario("baseline-greedy-1", "one agent, always threshold 5000", E::binary(1, 1000), "baseline-greedy", 100),
        scenario("baseline-moderate-10", "ten agents, always threshold 50", E::binary(10, 1000), "baseline-moderate", 100),
        scenario("baseline-greedy-10", "ten agents, always threshold 5000", E::binary(10, 1000), "baseline-greedy", 100),
        scenario("NE-1-binary", "one online NE agent, greedy or moderate", E::binary(1, 1000), "ne", 100),
        scenario("NE-10-binary", "ten online NE agents, greedy or moderate", E::binary(10, 500), "ne", 100),
        scenario("DRQN-1-binary", "one DRQN agent, greedy or moderate", E::binary(1, 1000), "drqn", 100),
        scenario("DRQN-10-binary", "ten DRQN agents, greedy or moderate", E::binary(10, 1000), "drqn", 100),
        scenario("NE-1-range", "one online NE agent, thresholds 30/50/80/5000", E::range(1, 1000), "ne", 100),
        scenario("DRQN-1-range", "one DRQN agent, thresholds 30/50/80/5000", E::range(1, 1000), "drqn", 30),
        scenario("LSTM-NE-1-range", "one LSTM online NE agent, thresholds 30/50/80/5000", E::range(1, 1000), "lstm-ne", 30),
        scenario("LSTM-DRQN-1-range", "one LSTM DRQN agent, thresholds 30/50/80/5000", E::range(1, 1000), "lstm-drqn", 30),
        scenario("NE-10-range", "ten online NE agents, thresholds 30/50/80/5000", E::range(10, 1000), "ne", 100),
        // Only used by the ten-agent comparison, which runs 30 x 3000 steps.
        scenario("DRQN-10-range", "ten DRQN agents, thresholds 30/50/80/5000", E::range(10, 3000), "drqn", 30),
        scenario("LSTM-NE-10-range", "ten LSTM online NE agents, thresholds 30/50/80/5000", E::range(10, 3000), "lstm-ne", 100),
        scenario("LSTM-DRQN-10-range", "ten LSTM DRQN agents, thresholds 30/50/80/5000", E::range(10, 3000), "lstm-drqn", 30),
    ]
}

pub fn find_scenario(name: &str) -> Result<Scenario> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

/// One series of a figure: a scenario, optionally with its run count or
/// horizon replaced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleEntry {
    pub scenario: String,
    pub runs: Option<usize>,
    pub horizon: Option<usize>,
}

impl BundleEntry {
    pub fn resolve(&self) -> Result<Scenario> {
        let mut s = find_scenario(&self.scenario)?;
        if let Some(r) = self.runs {
            s.num_runs = r;
        }
        if let Some(h) = self.horizon {
            s.env.horizon = h;
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureBundle {
    pub id: String,
    pub title: String,
    pub entries: Vec<BundleEntry>,
}

fn entry(scenario: &str) -> BundleEntry {
    BundleEntry {
        scenario: scenario.to_string(),
        runs: None,
        horizon: None,
    }
}

fn bundle(id: &str, title: &str, entries: Vec<BundleEntry>) -> FigureBundle {
    FigureBundle {
        id: id.to_string(),
        title: title.to_string(),
        entries,
    }
}

/// Figure bundles `fig1` to `fig13`.
pub fn figure_bundles() -> Vec<FigureBundle> {
    let runs = |s: &str, runs: usize, horizon: Option<usize>| BundleEntry {
        scenario: s.to_string(),
        runs: Some(runs),
        horizon,
    };
    vec![
        bundle("fig1", "Baseline moderate and greedy agents", vec![entry("baseline-moderate-1"), entry("baseline-greedy-1")]),
        bundle("fig2", "Single online NE agent, greedy or moderate", vec![entry("NE-1-binary")]),
        bundle("fig3", "Ten online NE agents, greedy or moderate", vec![entry("NE-10-binary")]),
        bundle("fig4", "Single DRQN agent, greedy or moderate", vec![entry("DRQN-1-binary")]),
        bundle("fig5", "Ten DRQN agents, greedy or moderate", vec![entry("DRQN-10-binary")]),
        bundle("fig6", "Single online NE agent, range of thresholds", vec![entry("NE-1-range")]),
        bundle("fig7", "Single DRQN agent, range of thresholds", vec![entry("DRQN-1-range")]),
        bundle("fig8", "Single LSTM online NE agent, range of thresholds", vec![entry("LSTM-NE-1-range")]),
        bundle("fig9", "Single LSTM DRQN agent, range of thresholds", vec![entry("LSTM-DRQN-1-range")]),
        bundle("fig10", "Ten online NE agents, range of thresholds", vec![entry("NE-10-range")]),
        bundle("fig11", "Ten LSTM online NE agents, range of thresholds", vec![entry("LSTM-NE-10-range")]),
        bundle(
            "fig12",
            "Agent type comparison, single agent",
            ["NE-1-range", "DRQN-1-range", "LSTM-NE-1-range", "LSTM-DRQN-1-range"]
                .iter()
                .map(|s| runs(s, 100, Some(1000)))
                .collect(),
        ),
        // The caption says "single agent" but the panel shows ten agents.
        bundle(
            "fig13",
            "Agent type comparison, ten agents",
            ["NE-10-range", "DRQN-10-range", "LSTM-NE-10-range", "LSTM-DRQN-10-range"]
                .iter()
                .map(|s| runs(s, 30, Some(3000)))
                .collect(),
        ),
    ]
}

pub fn find_figure(id: &str) -> Result<FigureBundle> {
    figure_bundles()
        .into_iter()
        .find(|b| b.id == id)
        .ok_or_else(|| Error::UnknownFigure(id.to_string()))
}
