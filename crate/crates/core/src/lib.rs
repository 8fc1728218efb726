//! A simulator and learning laboratory for the sustainable foraging problem.
//!
//! Agents harvest a shared stock that regrows in proportion to what is left.
//! Each step an agent picks an energy threshold and gathers only while its
//! energy is below it; the largest threshold is effectively "always gather".
//! Agents are driven by fixed baselines, online neuro-evolution, or online
//! Q-learning, each optionally with an LSTM over the last 25 observations.

pub mod agents;
pub mod checkpoint;
pub mod drqn;
pub mod environment;
pub mod error;
pub mod harness;
pub mod nets;
pub mod neuroevolution;
pub mod policy;
pub mod rng;
pub mod validation;

pub use agents::{Agent, AgentBuilder, AgentContext, AgentRegistry};
pub use environment::{EnvConfig, EnvState, Environment, StepReport};
pub use error::{Error, Result};
pub use harness::{run_batch, run_simulation, Scenario};
