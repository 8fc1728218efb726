use serde::{Deserialize, Serialize};

use super::{logistic, ObservationWindow};
use crate::error::{Error, Result};

const GATES: usize = 4;
// Gate order inside the flat layout.
const I: usize = 0;
const F: usize = 1;
const G: usize = 2;
const O: usize = 3;

/// Single-layer LSTM followed by a linear readout, stored flat.
///
/// Layout: four gate matrices in the order input, forget, candidate, output,
/// each `(input_dim + hidden) x hidden` row-major with the input rows first
/// and the recurrent rows after; then the four gate biases (`hidden` each);
/// then the readout `w2` (hidden x outputs, row-major) and `b2` (outputs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    input_dim: usize,
    hidden: usize,
    outputs: usize,
    data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmOutput {
    pub scores: Vec<f64>,
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

/// Per-timestep values kept for backpropagation through time.
struct StepTrace {
    z: Vec<f64>,
    gates: [Vec<f64>; GATES],
    c_prev: Vec<f64>,
    c_tanh: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden: usize, outputs: usize) -> Self {
        Self {
            input_dim,
            hidden,
            outputs,
            data: vec![0.0; Self::param_count(input_dim, hidden, outputs)],
        }
    }

    pub fn from_flat(input_dim: usize, hidden: usize, outputs: usize, data: Vec<f64>) -> Result<Self> {
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
            data,
        })
    }

    pub fn param_count(input_dim: usize, hidden: usize, outputs: usize) -> usize {
        GATES * ((input_dim + hidden) * hidden + hidden) + hidden * outputs + outputs
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
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn gate_rows(&self) -> usize {
        self.input_dim + self.hidden
    }

    fn gate_w_offset(&self, gate: usize) -> usize {
        gate * self.gate_rows() * self.hidden
    }

    fn gate_b_offset(&self, gate: usize) -> usize {
        GATES * self.gate_rows() * self.hidden + gate * self.hidden
    }

    fn w2_offset(&self) -> usize {
        GATES * (self.gate_rows() * self.hidden + self.hidden)
    }

    fn b2_offset(&self) -> usize {
        self.w2_offset() + self.hidden * self.outputs
    }

    pub fn gate_weights(&self, gate: usize) -> &[f64] {
        let o = self.gate_w_offset(gate);
        &self.data[o..o + self.gate_rows() * self.hidden]
    }

    pub fn gate_bias(&self, gate: usize) -> &[f64] {
        let o = self.gate_b_offset(gate);
        &self.data[o..o + self.hidden]
    }

    pub fn w2(&self) -> &[f64] {
        &self.data[self.w2_offset()..self.b2_offset()]
    }

    pub fn b2(&self) -> &[f64] {
        &self.data[self.b2_offset()..]
    }

    pub fn b2_mut(&mut self) -> &mut [f64] {
        let o = self.b2_offset();
        &mut self.data[o..]
    }

    pub(crate) fn bias_mask(&self) -> Vec<bool> {
        let bias_start = self.gate_b_offset(0);
        let w2 = self.w2_offset();
        let b2 = self.b2_offset();
        (0..self.data.len())
            .map(|i| (bias_start..w2).contains(&i) || i >= b2)
            .collect()
    }

    fn check_window(&self, window: &ObservationWindow) -> Result<()> {
        if window.is_empty() {
            return Err(Error::EmptyWindow);
        }
        if let Some(x) = window.iter().find(|x| x.len() != self.input_dim) {
            return Err(Error::Dimension {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn cell_step(&self, x: &[f64], h: &[f64], c: &[f64]) -> StepTrace {
        let hid = self.hidden;
        let mut z = Vec::with_capacity(self.gate_rows());
        z.extend_from_slice(x);
        z.extend_from_slice(h);
        let gates: [Vec<f64>; GATES] = std::array::from_fn(|gate| {
            let w = self.gate_weights(gate);
            let mut a = self.gate_bias(gate).to_vec();
            for (r, &zr) in z.iter().enumerate() {
                for (aj, &wj) in a.iter_mut().zip(&w[r * hid..(r + 1) * hid]) {
                    *aj += zr * wj;
                }
            }
            if gate == G {
                a.iter_mut().for_each(|v| *v = v.tanh());
            } else {
                a.iter_mut().for_each(|v| *v = logistic(*v));
            }
            a
        });
        let c_new: Vec<f64> = (0..hid)
            .map(|j| gates[F][j] * c[j] + gates[I][j] * gates[G][j])
            .collect();
        let c_tanh = c_new.iter().map(|v| v.tanh()).collect();
        StepTrace {
            z,
            gates,
            c_prev: c.to_vec(),
            c_tanh,
        }
    }

    fn run(&self, window: &ObservationWindow) -> Result<(Vec<StepTrace>, Vec<f64>, Vec<f64>)> {
        self.check_window(window)?;
        let hid = self.hidden;
        let mut h = vec![0.0; hid];
        let mut c = vec![0.0; hid];
        let mut traces = Vec::with_capacity(window.len());
        for x in window.iter() {
            let t = self.cell_step(x, &h, &c);
            c = (0..hid)
                .map(|j| t.gates[F][j] * t.c_prev[j] + t.gates[I][j] * t.gates[G][j])
                .collect();
            h = (0..hid).map(|j| t.gates[O][j] * t.c_tanh[j]).collect();
            traces.push(t);
        }
        Ok((traces, h, c))
    }

    fn readout(&self, h: &[f64]) -> Vec<f64> {
        let k = self.outputs;
        let w2 = self.w2();
        let mut scores = self.b2().to_vec();
        for (j, &hj) in h.iter().enumerate() {
            for (s, &w) in scores.iter_mut().zip(&w2[j * k..(j + 1) * k]) {
                *s += hj * w;
            }
        }
        scores
    }

    /// Runs the window oldest-first from a zero state and reads out the last
    /// hidden state.
    pub fn forward(&self, window: &ObservationWindow) -> Result<LstmOutput> {
        let (_, hidden, cell) = self.run(window)?;
        Ok(LstmOutput {
            scores: self.readout(&hidden),
            hidden,
            cell,
        })
    }

    /// Gradient of `scores . output_grad` with respect to every parameter,
    /// backpropagated through the whole window.
    pub fn gradient(&self, window: &ObservationWindow, output_grad: &[f64]) -> Result<Vec<f64>> {
        if output_grad.len() != self.outputs {
            return Err(Error::Dimension {
                expected: self.outputs,
                got: output_grad.len(),
            });
        }
        let (traces, h_last, _) = self.run(window)?;
        let (hid, k, rows) = (self.hidden, self.outputs, self.gate_rows());
        let mut grad = vec![0.0; self.data.len()];

        let w2o = self.w2_offset();
        let b2o = self.b2_offset();
        grad[b2o..].copy_from_slice(output_grad);
        let w2 = self.w2();
        let mut dh = vec![0.0; hid];
        for j in 0..hid {
            for c in 0..k {
                grad[w2o + j * k + c] = h_last[j] * output_grad[c];
                dh[j] += w2[j * k + c] * output_grad[c];
            }
        }

        let mut dc_next = vec![0.0; hid];
        for t in traces.iter().rev() {
            let [ig, fg, gg, og] = &t.gates;
            let mut da: [Vec<f64>; GATES] = std::array::from_fn(|_| vec![0.0; hid]);
            for j in 0..hid {
                let tc = t.c_tanh[j];
                let d_o = dh[j] * tc;
                let dc = dc_next[j] + dh[j] * og[j] * (1.0 - tc * tc);
                let d_i = dc * gg[j];
                let d_g = dc * ig[j];
                let d_f = dc * t.c_prev[j];
                dc_next[j] = dc * fg[j];
                da[I][j] = d_i * ig[j] * (1.0 - ig[j]);
                da[F][j] = d_f * fg[j] * (1.0 - fg[j]);
                da[G][j] = d_g * (1.0 - gg[j] * gg[j]);
                da[O][j] = d_o * og[j] * (1.0 - og[j]);
            }
            let mut dz = vec![0.0; rows];
            for gate in 0..GATES {
                let wo = self.gate_w_offset(gate);
                let bo = self.gate_b_offset(gate);
                let w = self.gate_weights(gate);
                for j in 0..hid {
                    grad[bo + j] += da[gate][j];
                }
                for (r, &zr) in t.z.iter().enumerate() {
                    let row = r * hid;
                    for j in 0..hid {
                        grad[wo + row + j] += zr * da[gate][j];
                        dz[r] += w[row + j] * da[gate][j];
                    }
                }
            }
            dh.copy_from_slice(&dz[self.input_dim..]);
        }
        Ok(grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(xs: &[&[f64]]) -> ObservationWindow {
        let mut w = ObservationWindow::new(25);
        for x in xs {
            w.push(x.to_vec());
        }
        w
    }

    #[test]
    fn zero_params_give_zero_output() {
        let p = LstmParams::zeros(3, 3, 2);
        let out = p.forward(&window(&[&[1.0, 2.0, 3.0], &[0.5, 0.5, 0.5]])).unwrap();
        assert_eq!(out.hidden, vec![0.0; 3]);
        assert_eq!(out.scores, vec![0.0; 2]);
    }

    #[test]
    fn single_step_matches_gate_equations() {
        let n = LstmParams::param_count(2, 1, 1);
        let data: Vec<f64> = (0..n).map(|i| 0.1 * (i as f64 + 1.0)).collect();
        let p = LstmParams::from_flat(2, 1, 1, data).unwrap();
        let x = [0.7, -0.4];
        // z = [x0, x1, h0=0]; each gate has 3 weights then biases follow.
        let pre = |gate: usize| {
            let w = p.gate_weights(gate);
            w[0] * x[0] + w[1] * x[1] + p.gate_bias(gate)[0]
        };
        let i = logistic(pre(I));
        let g = pre(G).tanh();
        let o = logistic(pre(O));
        let c = i * g;
        let h = o * c.tanh();
        let out = p.forward(&window(&[&x])).unwrap();
        assert!((out.cell[0] - c).abs() < 1e-15);
        assert!((out.hidden[0] - h).abs() < 1e-15);
        assert!((out.scores[0] - (p.w2()[0] * h + p.b2()[0])).abs() < 1e-15);
    }

    #[test]
    fn empty_window_is_rejected() {
        let p = LstmParams::zeros(3, 3, 2);
        assert!(matches!(p.forward(&ObservationWindow::new(25)), Err(Error::EmptyWindow)));
        assert!(matches!(
            p.gradient(&ObservationWindow::new(25), &[1.0, 0.0]),
            Err(Error::EmptyWindow)
        ));
    }

    #[test]
    fn zero_output_grad_gives_zero_gradient() {
        let n = LstmParams::param_count(3, 3, 2);
        let p = LstmParams::from_flat(3, 3, 2, (0..n).map(|i| (i as f64).cos() * 0.3).collect())
            .unwrap();
        let g = p.gradient(&window(&[&[0.1, 0.2, 0.3], &[0.3, 0.2, 0.1]]), &[0.0, 0.0]).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }
}
