//! Feed-forward and recurrent layer builders.
//!
//! Specs describe an architecture; `init` samples fresh parameters and
//! `forward` records the computation on a [`Tape`]. The same forward code
//! serves training and inference so the two can never drift apart.

use rand::Rng;

use crate::error::NnError;
use crate::params::ParamSet;
use crate::tape::{Tape, ValueId};
use crate::tensor::Tensor;

fn uniform_tensor(rows: usize, cols: usize, bound: f64, rng: &mut impl Rng) -> Tensor {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    Tensor::matrix(rows, cols, data).expect("extent matches data length")
}

/// Multi-layer perceptron: tanh hidden layers, linear output.
#[derive(Clone, Debug)]
pub struct MlpSpec {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
}

impl MlpSpec {
    pub fn new(input: usize, hidden: Vec<usize>, output: usize) -> Self {
        Self {
            input,
            hidden,
            output,
        }
    }

    fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden.len() + 1);
        let mut prev = self.input;
        for &h in &self.hidden {
            dims.push((prev, h));
            prev = h;
        }
        dims.push((prev, self.output));
        dims
    }

    /// Samples weights and biases uniformly in ±1/√fan_in.
    pub fn init(&self, label: impl Into<String>, rng: &mut impl Rng) -> ParamSet {
        let mut ps = ParamSet::new(label);
        for (i, (fan_in, fan_out)) in self.layer_dims().into_iter().enumerate() {
            let bound = 1.0 / (fan_in as f64).sqrt();
            ps.insert(format!("l{i}.w"), uniform_tensor(fan_in, fan_out, bound, rng));
            ps.insert(format!("l{i}.b"), uniform_tensor(1, fan_out, bound, rng));
        }
        ps
    }

    /// Records `input [B, in] -> [B, out]` on the tape.
    pub fn forward(
        &self,
        tape: &mut Tape,
        params: &ParamSet,
        input: ValueId,
    ) -> Result<ValueId, NnError> {
        let n_layers = self.hidden.len() + 1;
        let mut x = input;
        for i in 0..n_layers {
            let w = params.feed(tape, &format!("l{i}.w"))?;
            let b = params.feed(tape, &format!("l{i}.b"))?;
            let z = tape.matmul(x, w)?;
            let z = tape.add_row(z, b)?;
            x = if i + 1 < n_layers { tape.tanh(z) } else { z };
        }
        Ok(x)
    }
}

/// Single-layer LSTM. `forward` consumes a sequence of `[B, input]` frames
/// and returns the final hidden state `[B, hidden]`.
///
/// Gate layout along the 4H axis is input, forget, cell, output. The
/// forget-gate bias is shifted by +1 at init so early training does not
/// erase the cell state.
#[derive(Clone, Debug)]
pub struct LstmSpec {
    pub input: usize,
    pub hidden: usize,
}

impl LstmSpec {
    pub fn new(input: usize, hidden: usize) -> Self {
        Self { input, hidden }
    }

    pub fn init(&self, label: impl Into<String>, rng: &mut impl Rng) -> ParamSet {
        let mut ps = ParamSet::new(label);
        let h = self.hidden;
        let in_bound = 1.0 / (self.input as f64).sqrt();
        let hid_bound = 1.0 / (h as f64).sqrt();
        ps.insert("w_ih", uniform_tensor(self.input, 4 * h, in_bound, rng));
        ps.insert("w_hh", uniform_tensor(h, 4 * h, hid_bound, rng));
        let mut b = uniform_tensor(1, 4 * h, hid_bound, rng);
        for f in &mut b.data_mut()[h..2 * h] {
            *f += 1.0;
        }
        ps.insert("b", b);
        ps
    }

    /// Runs the recurrence over `seq` (oldest frame first). All frames must
    /// be `[batch, input]`. The input-side projection for every timestep is
    /// computed as one stacked matmul, which dominates the cost at the
    /// short sequence lengths used here.
    pub fn forward(
        &self,
        tape: &mut Tape,
        params: &ParamSet,
        seq: &[Tensor],
        batch: usize,
    ) -> Result<ValueId, NnError> {
        if seq.is_empty() {
            return Err(NnError::EmptySequence);
        }
        let steps = seq.len();
        let h = self.hidden;
        let mut stacked = Vec::with_capacity(steps * batch * self.input);
        for frame in seq {
            let (r, c) = frame.dims2()?;
            if (r, c) != (batch, self.input) {
                return Err(NnError::InvalidShape {
                    shape: frame.shape().to_vec(),
                    reason: format!("lstm frame must be [{batch}, {}]", self.input),
                });
            }
            stacked.extend_from_slice(frame.data());
        }
        let x = tape.constant_raw(steps * batch, self.input, stacked);

        let w_ih = params.feed(tape, "w_ih")?;
        let w_hh = params.feed(tape, "w_hh")?;
        let b = params.feed(tape, "b")?;
        let x_proj = tape.matmul(x, w_ih)?;

        let mut state: Option<(ValueId, ValueId)> = None; // (h, c), zero before t=0
        for t in 0..steps {
            let xp = tape.slice_rows(x_proj, t * batch, (t + 1) * batch)?;
            let pre = match state {
                None => tape.add_row(xp, b)?,
                Some((h_prev, _)) => {
                    let hp = tape.matmul(h_prev, w_hh)?;
                    let s = tape.add(xp, hp)?;
                    tape.add_row(s, b)?
                }
            };
            let i_gate = tape.slice_cols(pre, 0, h)?;
            let i_gate = tape.sigmoid(i_gate);
            let g_gate = tape.slice_cols(pre, 2 * h, 3 * h)?;
            let g_gate = tape.tanh(g_gate);
            let o_gate = tape.slice_cols(pre, 3 * h, 4 * h)?;
            let o_gate = tape.sigmoid(o_gate);
            let new_c = match state {
                None => tape.mul(i_gate, g_gate)?,
                Some((_, c_prev)) => {
                    let f_gate = tape.slice_cols(pre, h, 2 * h)?;
                    let f_gate = tape.sigmoid(f_gate);
                    let keep = tape.mul(f_gate, c_prev)?;
                    let write = tape.mul(i_gate, g_gate)?;
                    tape.add(keep, write)?
                }
            };
            let c_act = tape.tanh(new_c);
            let new_h = tape.mul(o_gate, c_act)?;
            state = Some((new_h, new_c));
        }
        Ok(state.expect("steps >= 1").0)
    }
}
