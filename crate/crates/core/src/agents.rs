//! Agent strategies behind a common trait, registered by name.
//!
//! A scenario names its agent kind (`"lstm-ne"`, `"drqn"`, ...) and carries a
//! JSON object of parameters; the [`AgentRegistry`] looks the kind up and the
//! matching [`AgentBuilder`] turns the parameters into a boxed [`Agent`].

use std::any::Any;
use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::drqn::{DrqnConfig, DrqnLearner};
use crate::environment::EnvConfig;
use crate::error::{config_err, Error, Result};
use crate::nets::{Activation, Architecture, NetShape};
use crate::neuroevolution::{NeConfig, NeLearner};
use crate::policy::{baseline_policy, BaselineKind, Observation, DEFAULT_MODERATE_THRESHOLD};
use crate::rng::{agent_rng, SimRng};

/// One agent's decision maker. Owns its own random stream.
pub trait Agent: Send {
    fn kind(&self) -> &str;

    /// Threshold index for this step.
    fn decide(&mut self, observation: &Observation) -> Result<usize>;

    /// Reward for the step just taken. `terminal` is set on the death step,
    /// after which the agent is never called again.
    fn learn(&mut self, reward: f64, terminal: bool) -> Result<()>;

    fn as_any(&self) -> &dyn Any;
}

pub struct AgentContext<'a> {
    pub env: &'a EnvConfig,
    pub agent_id: usize,
    pub run_seed: u64,
}

pub trait AgentBuilder: Send + Sync {
    fn description(&self) -> &'static str;

    fn build(&self, ctx: &AgentContext<'_>, params: &Value) -> Result<Box<dyn Agent>>;
}

pub struct AgentRegistry {
    builders: BTreeMap<String, Box<dyn AgentBuilder>>,
}

impl Default for AgentRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("baseline-moderate", BaselineBuilder(BaselineKind::Moderate));
        r.register("baseline-greedy", BaselineBuilder(BaselineKind::Greedy));
        r.register("ne", NeBuilder(Architecture::Ffn));
        r.register("lstm-ne", NeBuilder(Architecture::Lstm));
        r.register("drqn", DrqnBuilder(Architecture::Ffn));
        r.register("lstm-drqn", DrqnBuilder(Architecture::Lstm));
        r
    }
}

impl AgentRegistry {
    pub fn empty() -> Self {
        Self {
            builders: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, builder: impl AgentBuilder + 'static) {
        self.builders.insert(name.to_string(), Box::new(builder));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.builders.contains_key(name)
    }

    pub fn kinds(&self) -> impl Iterator<Item = (&str, &'static str)> {
        self.builders
            .iter()
            .map(|(k, b)| (k.as_str(), b.description()))
    }

    pub fn build(&self, kind: &str, ctx: &AgentContext<'_>, params: &Value) -> Result<Box<dyn Agent>> {
        self.builders
            .get(kind)
            .ok_or_else(|| Error::UnknownAgent(kind.to_string()))?
            .build(ctx, params)
    }
}

fn bad_params(e: serde_json::Error) -> Error {
    config_err(format!("agent params: {e}"))
}

/// Splits network options out of an agent's parameter object; the rest is
/// parsed as the learner config.
fn split_net_options(
    params: &Value,
    architecture: Architecture,
    env: &EnvConfig,
) -> Result<(NetShape, Value)> {
    let mut map = match params {
        Value::Null => Map::new(),
        Value::Object(m) => m.clone(),
        other => return Err(config_err(format!("agent params must be an object, got {other}"))),
    };
    let mut shape = NetShape::standard(architecture, env.num_thresholds());
    if let Some(v) = map.remove("activation") {
        shape.activation = Activation::deserialize(v).map_err(bad_params)?;
    }
    if let Some(v) = map.remove("window") {
        if architecture == Architecture::Lstm {
            shape.window = usize::deserialize(v).map_err(bad_params)?;
            if shape.window == 0 {
                return Err(config_err("window must be >= 1"));
            }
        }
    }
    Ok((shape, Value::Object(map)))
}

struct BaselineBuilder(BaselineKind);

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BaselineParams {
    moderate_threshold: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            moderate_threshold: DEFAULT_MODERATE_THRESHOLD,
        }
    }
}

pub struct BaselineAgent {
    kind: &'static str,
    choice: usize,
}

impl AgentBuilder for BaselineBuilder {
    fn description(&self) -> &'static str {
        match self.0 {
            BaselineKind::Moderate => "always chooses the moderate threshold (50 by default)",
            BaselineKind::Greedy => "always chooses the largest threshold",
        }
    }

    fn build(&self, ctx: &AgentContext<'_>, params: &Value) -> Result<Box<dyn Agent>> {
        let p: BaselineParams = if params.is_null() {
            BaselineParams::default()
        } else {
            serde_json::from_value(params.clone()).map_err(bad_params)?
        };
        let choice = baseline_policy(self.0, ctx.env, p.moderate_threshold)?;
        Ok(Box::new(BaselineAgent {
            kind: match self.0 {
                BaselineKind::Moderate => "baseline-moderate",
                BaselineKind::Greedy => "baseline-greedy",
            },
            choice: choice.index,
        }))
    }
}

impl Agent for BaselineAgent {
    fn kind(&self) -> &str {
        self.kind
    }
    fn decide(&mut self, _: &Observation) -> Result<usize> {
        Ok(self.choice)
    }
    fn learn(&mut self, _: f64, _: bool) -> Result<()> {
        Ok(())
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

struct NeBuilder(Architecture);

pub struct NeAgent {
    kind: &'static str,
    learner: NeLearner,
    rng: SimRng,
}

impl NeAgent {
    pub fn learner(&self) -> &NeLearner {
        &self.learner
    }
}

impl AgentBuilder for NeBuilder {
    fn description(&self) -> &'static str {
        match self.0 {
            Architecture::Ffn => "online neuro-evolution, feedforward networks",
            Architecture::Lstm => "online neuro-evolution, LSTM networks over a rolling window",
        }
    }

    fn build(&self, ctx: &AgentContext<'_>, params: &Value) -> Result<Box<dyn Agent>> {
        let (shape, rest) = split_net_options(params, self.0, ctx.env)?;
        let config: NeConfig = serde_json::from_value(rest).map_err(bad_params)?;
        let mut rng = agent_rng(ctx.run_seed, ctx.agent_id);
        let learner = NeLearner::new(&shape, config, &mut rng)?;
        Ok(Box::new(NeAgent {
            kind: match self.0 {
                Architecture::Ffn => "ne",
                Architecture::Lstm => "lstm-ne",
            },
            learner,
            rng,
        }))
    }
}

impl Agent for NeAgent {
    fn kind(&self) -> &str {
        self.kind
    }
    fn decide(&mut self, observation: &Observation) -> Result<usize> {
        self.learner.decide(observation.to_vec(), &mut self.rng)
    }
    fn learn(&mut self, reward: f64, terminal: bool) -> Result<()> {
        self.learner.reward(reward, terminal, &mut self.rng)
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

struct DrqnBuilder(Architecture);

pub struct DrqnAgent {
    kind: &'static str,
    learner: DrqnLearner,
    rng: SimRng,
}

impl DrqnAgent {
    pub fn learner(&self) -> &DrqnLearner {
        &self.learner
    }
}

impl AgentBuilder for DrqnBuilder {
    fn description(&self) -> &'static str {
        match self.0 {
            Architecture::Ffn => "online Q-learning, feedforward network",
            Architecture::Lstm => "online Q-learning, LSTM network trained through the window",
        }
    }

    fn build(&self, ctx: &AgentContext<'_>, params: &Value) -> Result<Box<dyn Agent>> {
        let (shape, rest) = split_net_options(params, self.0, ctx.env)?;
        let config: DrqnConfig = serde_json::from_value(rest).map_err(bad_params)?;
        let mut rng = agent_rng(ctx.run_seed, ctx.agent_id);
        let learner = DrqnLearner::new(&shape, &config, &mut rng)?;
        Ok(Box::new(DrqnAgent {
            kind: match self.0 {
                Architecture::Ffn => "drqn",
                Architecture::Lstm => "lstm-drqn",
            },
            learner,
            rng,
        }))
    }
}

impl Agent for DrqnAgent {
    fn kind(&self) -> &str {
        self.kind
    }
    fn decide(&mut self, observation: &Observation) -> Result<usize> {
        self.learner.decide(observation.to_vec(), &mut self.rng)
    }
    fn learn(&mut self, reward: f64, terminal: bool) -> Result<()> {
        self.learner.reward(reward, terminal)
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}
