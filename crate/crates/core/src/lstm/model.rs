use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::window::WindowSample;
use crate::error::{Error, Result};

/// Gate blocks in the stacked gate matrix, in row order.
pub const GATE_NAMES: [&str; 4] = ["input", "forget", "output", "candidate"];

const INPUT: usize = 0;
const FORGET: usize = 1;
const OUTPUT: usize = 2;
const CANDIDATE: usize = 3;

/// Trainable tensors of the network, also used for gradients and optimizer
/// moments.
///
/// `gate_weights` stacks the four gate matrices (input, forget, output,
/// candidate), each `hidden × (input_width + hidden)`, row-major; every row
/// multiplies the concatenation `[x_t; h_{t-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub gate_weights: Vec<f64>,
    pub gate_bias: Vec<f64>,
    /// `2 × hidden`, row-major.
    pub out_weights: Vec<f64>,
    pub out_bias: Vec<f64>,
}

impl Params {
    pub fn zeros(input_width: usize, hidden: usize) -> Self {
        Params {
            gate_weights: vec![0.0; 4 * hidden * (input_width + hidden)],
            gate_bias: vec![0.0; 4 * hidden],
            out_weights: vec![0.0; 2 * hidden],
            out_bias: vec![0.0; 2],
        }
    }

    pub fn tensors(&self) -> [&[f64]; 4] {
        [
            &self.gate_weights,
            &self.gate_bias,
            &self.out_weights,
            &self.out_bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 4] {
        [
            &mut self.gate_weights,
            &mut self.gate_bias,
            &mut self.out_weights,
            &mut self.out_bias,
        ]
    }

    pub fn len(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.gate_weights
            .iter()
            .chain(&self.gate_bias)
            .chain(&self.out_weights)
            .chain(&self.out_bias)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.gate_weights
            .iter_mut()
            .chain(&mut self.gate_bias)
            .chain(&mut self.out_weights)
            .chain(&mut self.out_bias)
    }

    pub fn fill(&mut self, value: f64) {
        self.iter_mut().for_each(|p| *p = value);
    }

    pub fn scale(&mut self, factor: f64) {
        self.iter_mut().for_each(|p| *p *= factor);
    }

    pub fn add_assign(&mut self, other: &Params) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += b;
        }
    }
}

/// Single-layer LSTM with a linear two-unit readout at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    input_width: usize,
    hidden: usize,
    time_steps: usize,
    params: Params,
}

impl LstmModel {
    /// All parameters zero.
    pub fn zeros(input_width: usize, hidden: usize, time_steps: usize) -> Result<Self> {
        if input_width == 0 || hidden == 0 {
            return Err(Error::InvalidConfig("input and hidden widths must be positive".into()));
        }
        if time_steps < 2 {
            return Err(Error::InvalidConfig(format!(
                "time steps must be at least 2, got {time_steps}"
            )));
        }
        Ok(LstmModel {
            input_width,
            hidden,
            time_steps,
            params: Params::zeros(input_width, hidden),
        })
    }

    /// Uniform `±1/sqrt(fan_in)` weights, zero biases except the forget
    /// gate, which starts at 1.
    pub fn init(input_width: usize, hidden: usize, time_steps: usize, seed: u64) -> Result<Self> {
        let mut model = LstmModel::zeros(input_width, hidden, time_steps)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gate_bound = 1.0 / ((input_width + hidden) as f64).sqrt();
        let out_bound = 1.0 / (hidden as f64).sqrt();
        let p = &mut model.params;
        for w in &mut p.gate_weights {
            *w = rng.gen_range(-gate_bound..gate_bound);
        }
        for w in &mut p.out_weights {
            *w = rng.gen_range(-out_bound..out_bound);
        }
        p.gate_bias[FORGET * hidden..(FORGET + 1) * hidden].fill(1.0);
        Ok(model)
    }

    pub fn from_params(
        input_width: usize,
        hidden: usize,
        time_steps: usize,
        params: Params,
    ) -> Result<Self> {
        let mut model = LstmModel::zeros(input_width, hidden, time_steps)?;
        let expected = Params::zeros(input_width, hidden);
        let shapes_match = expected
            .tensors()
            .iter()
            .zip(params.tensors())
            .all(|(a, b)| a.len() == b.len());
        if !shapes_match {
            return Err(Error::InvalidConfig("parameter shapes do not match dimensions".into()));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        model.params = params;
        Ok(model)
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn time_steps(&self) -> usize {
        self.time_steps
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    fn row_len(&self) -> usize {
        self.input_width + self.hidden
    }

    /// Runs the recurrence from zero hidden and cell state over every step of
    /// the window, padding included.
    pub fn forward(&self, window: &WindowSample<'_>) -> Result<ForwardPass> {
        let mut pass = ForwardPass::default();
        self.forward_into(window, &mut pass)?;
        Ok(pass)
    }

    /// [`forward`](Self::forward) reusing the buffers of `pass`.
    pub fn forward_into(&self, window: &WindowSample<'_>, pass: &mut ForwardPass) -> Result<()> {
        if window.width() != self.input_width {
            return Err(Error::WidthMismatch {
                expected: self.input_width,
                actual: window.width(),
            });
        }
        let (d, h, steps) = (self.input_width, self.hidden, window.steps());
        let row_len = self.row_len();
        pass.reset(steps, h);
        let p = &self.params;

        for t in 0..steps {
            pass.nonzero.clear();
            if let Some(x) = window.input(t) {
                for (j, &v) in x.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(Error::NonFiniteInput { step: t });
                    }
                    if v != 0.0 {
                        pass.nonzero.push((j, v));
                    }
                }
            }
            pass.nz_offsets.push(pass.nz_all.len());
            pass.nz_all.extend_from_slice(&pass.nonzero);

            let (h_prev, h_rest) = pass.h.split_at_mut((t + 1) * h);
            let h_prev = &h_prev[t * h..];
            let gates = &mut pass.gates[t * 4 * h..(t + 1) * 4 * h];
            for (r, z) in gates.iter_mut().enumerate() {
                let row = &p.gate_weights[r * row_len..(r + 1) * row_len];
                let mut acc = p.gate_bias[r];
                for &(j, v) in &pass.nonzero {
                    acc += row[j] * v;
                }
                acc += dot(&row[d..], h_prev);
                *z = if r / h == CANDIDATE {
                    acc.tanh()
                } else {
                    sigmoid(acc)
                };
            }

            let (c_prev, c_rest) = pass.c.split_at_mut((t + 1) * h);
            let c_prev = &c_prev[t * h..];
            let c_next = &mut c_rest[..h];
            let h_next = &mut h_rest[..h];
            let tanh_c = &mut pass.tanh_c[t * h..(t + 1) * h];
            for k in 0..h {
                let i = gates[INPUT * h + k];
                let f = gates[FORGET * h + k];
                let o = gates[OUTPUT * h + k];
                let g = gates[CANDIDATE * h + k];
                c_next[k] = f * c_prev[k] + i * g;
                tanh_c[k] = c_next[k].tanh();
                h_next[k] = o * tanh_c[k];
            }

            for m in 0..2 {
                pass.outputs[t][m] = p.out_bias[m] + dot(&p.out_weights[m * h..(m + 1) * h], h_next);
            }
        }
        Ok(())
    }

    /// Exact gradient of [`loss`] with respect to every parameter.
    pub fn backward(&self, window: &WindowSample<'_>, pass: &ForwardPass) -> Params {
        let mut grads = Params::zeros(self.input_width, self.hidden);
        let mut scratch = BackwardScratch::default();
        self.accumulate_gradients(window, pass, &mut grads, &mut scratch);
        grads
    }

    /// Adds the gradient for one window into `grads`.
    pub fn accumulate_gradients(
        &self,
        window: &WindowSample<'_>,
        pass: &ForwardPass,
        grads: &mut Params,
        scratch: &mut BackwardScratch,
    ) {
        let (d, h) = (self.input_width, self.hidden);
        let row_len = self.row_len();
        let p = &self.params;
        // Padding only trails the window, so steps past the last valid one
        // influence nothing that carries loss.
        let last = window.valid().min(pass.steps);
        scratch.reset(h);
        let BackwardScratch {
            dh_next,
            dc_next,
            da,
            dh,
        } = scratch;

        for t in (0..last).rev() {
            let y = pass.outputs[t];
            let target = window.target(t);
            let dy = [2.0 * (y[0] - target[0]), 2.0 * (y[1] - target[1])];
            let h_t = &pass.h[(t + 1) * h..(t + 2) * h];
            let h_prev = &pass.h[t * h..(t + 1) * h];
            let c_prev = &pass.c[t * h..(t + 1) * h];
            let tanh_c = &pass.tanh_c[t * h..(t + 1) * h];
            let gates = &pass.gates[t * 4 * h..(t + 1) * 4 * h];

            dh.copy_from_slice(dh_next);
            for m in 0..2 {
                grads.out_bias[m] += dy[m];
                axpy(&mut grads.out_weights[m * h..(m + 1) * h], dy[m], h_t);
                axpy(dh, dy[m], &p.out_weights[m * h..(m + 1) * h]);
            }

            for k in 0..h {
                let i = gates[INPUT * h + k];
                let f = gates[FORGET * h + k];
                let o = gates[OUTPUT * h + k];
                let g = gates[CANDIDATE * h + k];
                let dc = dh[k] * o * (1.0 - tanh_c[k] * tanh_c[k]) + dc_next[k];
                da[INPUT * h + k] = dc * g * i * (1.0 - i);
                da[FORGET * h + k] = dc * c_prev[k] * f * (1.0 - f);
                da[OUTPUT * h + k] = dh[k] * tanh_c[k] * o * (1.0 - o);
                da[CANDIDATE * h + k] = dc * i * (1.0 - g * g);
                dc_next[k] = dc * f;
            }

            dh_next.fill(0.0);
            let nz = pass.nonzero_at(t);
            for (r, &g) in da.iter().enumerate() {
                grads.gate_bias[r] += g;
                if g == 0.0 {
                    continue;
                }
                let grow = &mut grads.gate_weights[r * row_len..(r + 1) * row_len];
                for &(j, v) in nz {
                    grow[j] += g * v;
                }
                axpy(&mut grow[d..], g, h_prev);
                axpy(dh_next, g, &p.gate_weights[r * row_len + d..(r + 1) * row_len]);
            }
        }
    }
}

/// Squared error summed over unmasked steps.
pub fn loss(outputs: &[[f64; 2]], window: &WindowSample<'_>) -> f64 {
    outputs
        .iter()
        .enumerate()
        .take(window.valid())
        .map(|(t, y)| {
            let target = window.target(t);
            (y[0] - target[0]).powi(2) + (y[1] - target[1]).powi(2)
        })
        .sum()
}

/// Outputs of one forward pass plus the activations backward needs.
#[derive(Debug, Clone, Default)]
pub struct ForwardPass {
    pub outputs: Vec<[f64; 2]>,
    steps: usize,
    /// Activated gates per step, `4 * hidden` each.
    gates: Vec<f64>,
    /// Cell and hidden states, `steps + 1` rows with row 0 the zero state.
    c: Vec<f64>,
    h: Vec<f64>,
    tanh_c: Vec<f64>,
    nonzero: Vec<(usize, f64)>,
    nz_all: Vec<(usize, f64)>,
    nz_offsets: Vec<usize>,
}

impl ForwardPass {
    fn reset(&mut self, steps: usize, h: usize) {
        self.steps = steps;
        self.outputs.clear();
        self.outputs.resize(steps, [0.0; 2]);
        self.gates.clear();
        self.gates.resize(steps * 4 * h, 0.0);
        self.c.clear();
        self.c.resize((steps + 1) * h, 0.0);
        self.h.clear();
        self.h.resize((steps + 1) * h, 0.0);
        self.tanh_c.clear();
        self.tanh_c.resize(steps * h, 0.0);
        self.nz_all.clear();
        self.nz_offsets.clear();
    }

    fn nonzero_at(&self, t: usize) -> &[(usize, f64)] {
        let end = self
            .nz_offsets
            .get(t + 1)
            .copied()
            .unwrap_or(self.nz_all.len());
        &self.nz_all[self.nz_offsets[t]..end]
    }

    /// Hidden state after step `t`.
    pub fn hidden_state(&self, t: usize) -> &[f64] {
        let h = self.h.len() / (self.steps + 1);
        &self.h[(t + 1) * h..(t + 2) * h]
    }

    /// Cell state after step `t`.
    pub fn cell_state(&self, t: usize) -> &[f64] {
        let h = self.c.len() / (self.steps + 1);
        &self.c[(t + 1) * h..(t + 2) * h]
    }
}

/// Reusable buffers for [`LstmModel::accumulate_gradients`].
#[derive(Debug, Clone, Default)]
pub struct BackwardScratch {
    dh_next: Vec<f64>,
    dc_next: Vec<f64>,
    da: Vec<f64>,
    dh: Vec<f64>,
}

impl BackwardScratch {
    fn reset(&mut self, h: usize) {
        for (buf, n) in [
            (&mut self.dh_next, h),
            (&mut self.dc_next, h),
            (&mut self.da, 4 * h),
            (&mut self.dh, h),
        ] {
            buf.clear();
            buf.resize(n, 0.0);
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
