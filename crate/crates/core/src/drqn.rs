//! Online Q-learning on the same small networks: one TD(0) update per step,
//! no replay buffer and no target network. The LSTM variant is trained by
//! backpropagation through the whole observation window.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::nets::{NetParams, NetShape, ObservationWindow};
use crate::policy::argmax_random_tie;

/// `epsilon = max(min, start * decay^step)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub min: f64,
    pub decay: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            min: 0.05,
            decay: 0.995,
        }
    }
}

impl EpsilonSchedule {
    pub fn at(&self, step: u64) -> f64 {
        (self.start * self.decay.powf(step as f64)).max(self.min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrqnConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
}

impl Default for DrqnConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            gamma: 0.9,
            epsilon: EpsilonSchedule::default(),
        }
    }
}

impl DrqnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(config_err(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(config_err(format!("gamma must be in [0, 1], got {}", self.gamma)));
        }
        let e = &self.epsilon;
        if !(0.0..=1.0).contains(&e.start) || !(0.0..=1.0).contains(&e.min) || e.min > e.start {
            return Err(config_err(format!(
                "epsilon needs 0 <= min <= start <= 1, got min {} start {}",
                e.min, e.start
            )));
        }
        if !(e.decay > 0.0 && e.decay <= 1.0) {
            return Err(config_err(format!(
                "epsilon decay must be in (0, 1], got {}",
                e.decay
            )));
        }
        Ok(())
    }
}

/// A Q-network and its learning hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QNetParams {
    pub net: NetParams,
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub prev: ObservationWindow,
    pub action: usize,
    pub reward: f64,
    /// Ignored when `terminal`.
    pub next: Option<ObservationWindow>,
    pub terminal: bool,
}

impl QNetParams {
    pub fn new(net: NetParams, config: &DrqnConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            net,
            learning_rate: config.learning_rate,
            gamma: config.gamma,
            epsilon: config.epsilon,
        })
    }

    pub fn q_values(&self, input: &ObservationWindow) -> Result<Vec<f64>> {
        self.net.scores(input)
    }

    /// Bootstrapped target from the current network.
    pub fn target(&self, t: &Transition) -> Result<f64> {
        if t.terminal || self.gamma == 0.0 {
            return Ok(t.reward);
        }
        let next = t
            .next
            .as_ref()
            .ok_or_else(|| config_err("non-terminal transition without a next state"))?;
        let best = self
            .q_values(next)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(t.reward + self.gamma * best)
    }

    /// Squared TD loss `(y - Q(prev, a))^2 / 2` and its gradient with the
    /// target held fixed.
    pub fn loss_and_gradient(&self, t: &Transition) -> Result<(f64, Vec<f64>)> {
        let y = self.target(t)?;
        let q = self.q_values(&t.prev)?;
        let k = q.len();
        if t.action >= k {
            return Err(Error::Dimension {
                expected: k,
                got: t.action + 1,
            });
        }
        let delta = y - q[t.action];
        let mut out_grad = vec![0.0; k];
        out_grad[t.action] = -delta;
        let grad = self.net.gradient(&t.prev, &out_grad)?;
        Ok((0.5 * delta * delta, grad))
    }

    /// One semi-gradient step on the acting network. Returns the absolute
    /// TD error.
    pub fn td_update(&mut self, t: &Transition) -> Result<f64> {
        let (loss, grad) = self.loss_and_gradient(t)?;
        let delta = (2.0 * loss).sqrt();
        if delta == 0.0 {
            return Ok(0.0);
        }
        for (w, g) in self.net.data_mut().iter_mut().zip(grad) {
            *w -= self.learning_rate * g;
        }
        Ok(delta)
    }
}

/// Uniform action with probability `epsilon`, otherwise the greedy one.
pub fn epsilon_greedy<R: Rng + ?Sized>(q: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..q.len())
    } else {
        argmax_random_tie(q, rng)
    }
}

/// A Q-learner for one agent.
#[derive(Clone, Debug)]
pub struct DrqnLearner {
    q: QNetParams,
    window: ObservationWindow,
    pending: Option<(ObservationWindow, usize)>,
    pending_reward: Option<f64>,
    decisions: u64,
    updates: u64,
}

impl DrqnLearner {
    pub fn new<R: Rng + ?Sized>(shape: &NetShape, config: &DrqnConfig, rng: &mut R) -> Result<Self> {
        let net = NetParams::init(shape, rng);
        Ok(Self::from_params(QNetParams::new(net, config)?, shape.window))
    }

    pub fn from_params(q: QNetParams, window: usize) -> Self {
        Self {
            q,
            window: ObservationWindow::new(window),
            pending: None,
            pending_reward: None,
            decisions: 0,
            updates: 0,
        }
    }

    pub fn params(&self) -> &QNetParams {
        &self.q
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    pub fn window(&self) -> &ObservationWindow {
        &self.window
    }

    /// Closes last step's transition with the new observation, learns from
    /// it, then picks this step's action.
    pub fn decide<R: Rng + ?Sized>(&mut self, observation: Vec<f64>, rng: &mut R) -> Result<usize> {
        self.window.push(observation);
        if let (Some((prev, action)), Some(reward)) = (self.pending.take(), self.pending_reward.take())
        {
            let t = Transition {
                prev,
                action,
                reward,
                next: Some(self.window.clone()),
                terminal: false,
            };
            self.q.td_update(&t)?;
            self.updates += 1;
        }
        let epsilon = self.q.epsilon.at(self.decisions);
        let q = self.q.q_values(&self.window)?;
        let action = epsilon_greedy(&q, epsilon, rng);
        self.pending = Some((self.window.clone(), action));
        self.decisions += 1;
        Ok(action)
    }

    /// Stores the reward for the pending transition; on death the transition
    /// is closed as terminal and learned from immediately.
    pub fn reward(&mut self, reward: f64, terminal: bool) -> Result<()> {
        if terminal {
            if let Some((prev, action)) = self.pending.take() {
                let t = Transition {
                    prev,
                    action,
                    reward,
                    next: None,
                    terminal: true,
                };
                self.q.td_update(&t)?;
                self.updates += 1;
            }
            self.pending_reward = None;
        } else {
            self.pending_reward = Some(reward);
        }
        Ok(())
    }
}
