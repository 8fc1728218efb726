use serde::{Deserialize, Serialize};

use super::Activation;
use crate::error::{Error, Result};

/// Two-layer fully connected network, stored flat.
///
/// Layout: `w1` (input_dim x hidden, row-major), `b1` (hidden),
/// `w2` (hidden x outputs, row-major), `b2` (outputs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfnParams {
    input_dim: usize,
    hidden: usize,
    outputs: usize,
    activation: Activation,
    data: Vec<f64>,
}

/// Intermediate values kept for the backward pass.
pub(crate) struct FfnTrace {
    pub pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub scores: Vec<f64>,
}

impl FfnParams {
    pub fn zeros(input_dim: usize, hidden: usize, outputs: usize, activation: Activation) -> Self {
        let len = Self::param_count(input_dim, hidden, outputs);
        Self {
            input_dim,
            hidden,
            outputs,
            activation,
            data: vec![0.0; len],
        }
    }

    pub fn from_flat(
        input_dim: usize,
        hidden: usize,
        outputs: usize,
        activation: Activation,
        data: Vec<f64>,
    ) -> Result<Self> {
        let expected = Self::param_count(input_dim, hidden, outputs);
        if data.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            input_dim,
            hidden,
            outputs,
            activation,
            data,
        })
    }

    pub fn param_count(input_dim: usize, hidden: usize, outputs: usize) -> usize {
        input_dim * hidden + hidden + hidden * outputs + outputs
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }
    pub fn hidden(&self) -> usize {
        self.hidden
    }
    pub fn outputs(&self) -> usize {
        self.outputs
    }
    pub fn activation(&self) -> Activation {
        self.activation
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn offsets(&self) -> [usize; 4] {
        let w1 = 0;
        let b1 = w1 + self.input_dim * self.hidden;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.hidden * self.outputs;
        [w1, b1, w2, b2]
    }

    pub fn w1(&self) -> &[f64] {
        let [w1, b1, _, _] = self.offsets();
        &self.data[w1..b1]
    }
    pub fn b1(&self) -> &[f64] {
        let [_, b1, w2, _] = self.offsets();
        &self.data[b1..w2]
    }
    pub fn w2(&self) -> &[f64] {
        let [_, _, w2, b2] = self.offsets();
        &self.data[w2..b2]
    }
    pub fn b2(&self) -> &[f64] {
        let [_, _, _, b2] = self.offsets();
        &self.data[b2..]
    }
    pub fn w1_mut(&mut self) -> &mut [f64] {
        let [w1, b1, _, _] = self.offsets();
        &mut self.data[w1..b1]
    }
    pub fn b1_mut(&mut self) -> &mut [f64] {
        let [_, b1, w2, _] = self.offsets();
        &mut self.data[b1..w2]
    }
    pub fn w2_mut(&mut self) -> &mut [f64] {
        let [_, _, w2, b2] = self.offsets();
        &mut self.data[w2..b2]
    }
    pub fn b2_mut(&mut self) -> &mut [f64] {
        let [_, _, _, b2] = self.offsets();
        &mut self.data[b2..]
    }

    /// `true` for positions holding a bias.
    pub(crate) fn bias_mask(&self) -> Vec<bool> {
        let [_, b1, w2, b2] = self.offsets();
        (0..self.data.len())
            .map(|i| (b1..w2).contains(&i) || i >= b2)
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.trace(x)?.scores)
    }

    pub(crate) fn trace(&self, x: &[f64]) -> Result<FfnTrace> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let (w1, b1, w2, b2) = (self.w1(), self.b1(), self.w2(), self.b2());
        let h = self.hidden;
        let mut pre = b1.to_vec();
        for (i, &xi) in x.iter().enumerate() {
            let row = &w1[i * h..(i + 1) * h];
            for (p, &w) in pre.iter_mut().zip(row) {
                *p += xi * w;
            }
        }
        let hidden: Vec<f64> = pre.iter().map(|&p| self.activation.apply(p)).collect();
        let mut scores = b2.to_vec();
        for (j, &hj) in hidden.iter().enumerate() {
            let row = &w2[j * self.outputs..(j + 1) * self.outputs];
            for (s, &w) in scores.iter_mut().zip(row) {
                *s += hj * w;
            }
        }
        Ok(FfnTrace {
            pre,
            hidden,
            scores,
        })
    }

    /// Gradient of `scores . output_grad` with respect to every parameter,
    /// laid out like [`Self::data`].
    pub fn gradient(&self, x: &[f64], output_grad: &[f64]) -> Result<Vec<f64>> {
        if output_grad.len() != self.outputs {
            return Err(Error::Dimension {
                expected: self.outputs,
                got: output_grad.len(),
            });
        }
        let trace = self.trace(x)?;
        let [w1o, b1o, w2o, b2o] = self.offsets();
        let (h, k) = (self.hidden, self.outputs);
        let w2 = self.w2();
        let mut grad = vec![0.0; self.data.len()];

        grad[b2o..].copy_from_slice(output_grad);
        let mut d_pre = vec![0.0; h];
        for j in 0..h {
            let mut dh = 0.0;
            for c in 0..k {
                grad[w2o + j * k + c] = trace.hidden[j] * output_grad[c];
                dh += w2[j * k + c] * output_grad[c];
            }
            d_pre[j] = dh * self.activation.derivative(trace.pre[j], trace.hidden[j]);
        }
        grad[b1o..b1o + h].copy_from_slice(&d_pre);
        for (i, &xi) in x.iter().enumerate() {
            for j in 0..h {
                grad[w1o + i * h + j] = xi * d_pre[j];
            }
        }
        Ok(grad)
    }
}
