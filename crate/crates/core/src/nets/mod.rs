//! Small from-scratch function approximators shared by both learners.
//!
//! Parameters live in a single flat `Vec<f64>` per network so that crossover,
//! mutation, gradient steps and checkpoints all operate on one ordered list.

mod ffn;
mod lstm;
mod window;

pub use ffn::FfnParams;
pub use lstm::{LstmOutput, LstmParams};
pub use window::ObservationWindow;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HIDDEN_UNITS: usize = 3;
pub const LSTM_WINDOW: usize = 25;
pub const INIT_RANGE: f64 = 0.5;

pub(crate) fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Hidden-layer activation of the feedforward network.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
    Logistic,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Logistic => logistic(x),
        }
    }

    /// Derivative given the pre-activation and the activated value.
    pub fn derivative(self, pre: f64, out: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Logistic => out * (1.0 - out),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    #[default]
    Ffn,
    Lstm,
}

/// Everything needed to build a network of a given architecture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetShape {
    pub architecture: Architecture,
    pub input_dim: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub activation: Activation,
    /// Observations fed per decision: 1 for the feedforward net.
    pub window: usize,
}

impl NetShape {
    /// Hidden width 3, one output per threshold, LSTM window 25.
    pub fn standard(architecture: Architecture, num_thresholds: usize) -> Self {
        Self {
            architecture,
            input_dim: 3 + num_thresholds,
            hidden: HIDDEN_UNITS,
            outputs: num_thresholds,
            activation: Activation::Tanh,
            window: match architecture {
                Architecture::Ffn => 1,
                Architecture::Lstm => LSTM_WINDOW,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "kebab-case")]
pub enum NetParams {
    Ffn(FfnParams),
    Lstm(LstmParams),
}

impl NetParams {
    pub fn zeros(shape: &NetShape) -> Self {
        match shape.architecture {
            Architecture::Ffn => NetParams::Ffn(FfnParams::zeros(
                shape.input_dim,
                shape.hidden,
                shape.outputs,
                shape.activation,
            )),
            Architecture::Lstm => {
                NetParams::Lstm(LstmParams::zeros(shape.input_dim, shape.hidden, shape.outputs))
            }
        }
    }

    /// Weights uniform in `[-0.5, 0.5]`, biases zero.
    pub fn init<R: Rng + ?Sized>(shape: &NetShape, rng: &mut R) -> Self {
        let mut p = Self::zeros(shape);
        let mask = p.bias_mask();
        for (v, is_bias) in p.data_mut().iter_mut().zip(mask) {
            if !is_bias {
                *v = rng.random_range(-INIT_RANGE..=INIT_RANGE);
            }
        }
        p
    }

    pub fn architecture(&self) -> Architecture {
        match self {
            NetParams::Ffn(_) => Architecture::Ffn,
            NetParams::Lstm(_) => Architecture::Lstm,
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            NetParams::Ffn(p) => p.outputs(),
            NetParams::Lstm(p) => p.outputs(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            NetParams::Ffn(p) => p.input_dim(),
            NetParams::Lstm(p) => p.input_dim(),
        }
    }

    pub fn data(&self) -> &[f64] {
        match self {
            NetParams::Ffn(p) => p.data(),
            NetParams::Lstm(p) => p.data(),
        }
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        match self {
            NetParams::Ffn(p) => p.data_mut(),
            NetParams::Lstm(p) => p.data_mut(),
        }
    }

    pub fn len(&self) -> usize {
        self.data().len()
    }

    pub fn is_empty(&self) -> bool {
        self.data().is_empty()
    }

    fn bias_mask(&self) -> Vec<bool> {
        match self {
            NetParams::Ffn(p) => p.bias_mask(),
            NetParams::Lstm(p) => p.bias_mask(),
        }
    }

    /// Same architecture, dimensions and activation.
    pub fn compatible(&self, other: &NetParams) -> bool {
        match (self, other) {
            (NetParams::Ffn(a), NetParams::Ffn(b)) => {
                a.input_dim() == b.input_dim()
                    && a.hidden() == b.hidden()
                    && a.outputs() == b.outputs()
                    && a.activation() == b.activation()
            }
            (NetParams::Lstm(a), NetParams::Lstm(b)) => {
                a.input_dim() == b.input_dim()
                    && a.hidden() == b.hidden()
                    && a.outputs() == b.outputs()
            }
            _ => false,
        }
    }

    /// Output scores. The feedforward net reads only the newest observation.
    pub fn scores(&self, window: &ObservationWindow) -> Result<Vec<f64>> {
        match self {
            NetParams::Ffn(p) => p.forward(window.latest().ok_or(Error::EmptyWindow)?),
            NetParams::Lstm(p) => Ok(p.forward(window)?.scores),
        }
    }

    /// Gradient of `scores . output_grad`, laid out like [`Self::data`].
    pub fn gradient(&self, window: &ObservationWindow, output_grad: &[f64]) -> Result<Vec<f64>> {
        match self {
            NetParams::Ffn(p) => {
                p.gradient(window.latest().ok_or(Error::EmptyWindow)?, output_grad)
            }
            NetParams::Lstm(p) => p.gradient(window, output_grad),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn init_is_deterministic_per_seed() {
        let shape = NetShape::standard(Architecture::Lstm, 4);
        let a = NetParams::init(&shape, &mut stream(9, 0));
        let b = NetParams::init(&shape, &mut stream(9, 0));
        let c = NetParams::init(&shape, &mut stream(10, 0));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn init_biases_zero_weights_bounded() {
        for arch in [Architecture::Ffn, Architecture::Lstm] {
            let p = NetParams::init(&NetShape::standard(arch, 4), &mut stream(1, 0));
            for (v, bias) in p.data().iter().zip(p.bias_mask()) {
                if bias {
                    assert_eq!(*v, 0.0);
                } else {
                    assert!(v.abs() <= INIT_RANGE);
                }
            }
        }
    }

    #[test]
    fn init_weights_are_centred() {
        let shape = NetShape::standard(Architecture::Lstm, 4);
        let mut rng = stream(42, 0);
        let mut draws = Vec::new();
        while draws.len() < 10_000 {
            let p = NetParams::init(&shape, &mut rng);
            let mask = p.bias_mask();
            draws.extend(p.data().iter().zip(mask).filter(|(_, b)| !b).map(|(v, _)| *v));
        }
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn standard_shapes() {
        let ffn = NetParams::zeros(&NetShape::standard(Architecture::Ffn, 4));
        assert_eq!(ffn.len(), 7 * 3 + 3 + 3 * 4 + 4);
        let lstm = NetParams::zeros(&NetShape::standard(Architecture::Lstm, 4));
        assert_eq!(lstm.len(), 4 * (10 * 3 + 3) + 3 * 4 + 4);
        assert!(!ffn.compatible(&lstm));
    }
}
