//! Reference implementations used by several test targets.
#![allow(dead_code)]

use evseg_core::lstm::{loss, LstmModel, Params, WindowSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Straight-line LSTM recurrence with one explicit matrix per gate. Shares
/// nothing with the library except the parameter layout.
pub fn reference_forward(model: &LstmModel, inputs: &[Vec<f64>], steps: usize) -> Vec<[f64; 2]> {
    let (d, hn) = (model.input_width(), model.hidden());
    let p = model.params();
    let cols = d + hn;
    let gate = |g: usize, row: usize, col: usize| p.gate_weights[(g * hn + row) * cols + col];
    let bias = |g: usize, row: usize| p.gate_bias[g * hn + row];

    let mut h = vec![0.0; hn];
    let mut c = vec![0.0; hn];
    let mut out = Vec::with_capacity(steps);
    for t in 0..steps {
        let zero = vec![0.0; d];
        let x = inputs.get(t).unwrap_or(&zero);
        let mut pre = [vec![0.0; hn], vec![0.0; hn], vec![0.0; hn], vec![0.0; hn]];
        for (g, pre_g) in pre.iter_mut().enumerate() {
            for (r, v) in pre_g.iter_mut().enumerate() {
                let mut s = bias(g, r);
                for (k, xk) in x.iter().enumerate() {
                    s += gate(g, r, k) * xk;
                }
                for (k, hk) in h.iter().enumerate() {
                    s += gate(g, r, d + k) * hk;
                }
                *v = s;
            }
        }
        let mut h_new = vec![0.0; hn];
        for r in 0..hn {
            let i = sigmoid(pre[0][r]);
            let f = sigmoid(pre[1][r]);
            let o = sigmoid(pre[2][r]);
            let g = pre[3][r].tanh();
            c[r] = f * c[r] + i * g;
            h_new[r] = o * c[r].tanh();
        }
        h = h_new;
        let mut y = [p.out_bias[0], p.out_bias[1]];
        for (j, yj) in y.iter_mut().enumerate() {
            for r in 0..hn {
                *yj += p.out_weights[j * hn + r] * h[r];
            }
        }
        out.push(y);
    }
    out
}

/// A small random model with non-trivial parameters.
pub fn random_model(rng: &mut ChaCha8Rng, d: usize, h: usize, steps: usize) -> LstmModel {
    let mut params = Params::zeros(d, h);
    for v in params.iter_mut() {
        *v = rng.gen_range(-0.8..0.8);
    }
    LstmModel::from_params(d, h, steps, params).unwrap()
}

pub struct RandomWindow {
    pub inputs: Vec<f64>,
    pub labels: Vec<bool>,
    pub width: usize,
    pub steps: usize,
    pub omega: f64,
}

impl RandomWindow {
    /// Dense random inputs, possibly shorter than `steps` (trailing padding).
    pub fn new(rng: &mut ChaCha8Rng, width: usize, steps: usize) -> Self {
        let valid = rng.gen_range(1..=steps);
        RandomWindow {
            inputs: (0..valid * width).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            labels: (0..valid).map(|_| rng.gen_bool(0.3)).collect(),
            width,
            steps,
            omega: rng.gen_range(0.5..4.0),
        }
    }

    pub fn sample(&self) -> WindowSample<'_> {
        WindowSample::new(&self.inputs, self.width, self.steps).with_labels(&self.labels, self.omega)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.inputs.chunks(self.width).map(<[f64]>::to_vec).collect()
    }
}

/// Largest relative error between the analytic gradient and central
/// differences with step `eps`, over every parameter.
pub fn max_gradient_error(model: &LstmModel, window: &WindowSample<'_>, eps: f64) -> f64 {
    let pass = model.forward(window).unwrap();
    let analytic: Vec<f64> = model.backward(window, &pass).iter().copied().collect();
    let cost = |m: &LstmModel| loss(&m.forward(window).unwrap().outputs, window);

    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (k, a) in analytic.iter().enumerate() {
        let orig = *probe.params().iter().nth(k).unwrap();
        *probe.params_mut().iter_mut().nth(k).unwrap() = orig + eps;
        let up = cost(&probe);
        *probe.params_mut().iter_mut().nth(k).unwrap() = orig - eps;
        let down = cost(&probe);
        *probe.params_mut().iter_mut().nth(k).unwrap() = orig;
        let numeric = (up - down) / (2.0 * eps);
        // Cancellation in `up - down` leaves about 1e-10 of absolute noise at
        // this step size, so components below 1e-6 are compared against that
        // floor instead of their own magnitude.
        let scale = a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((a - numeric).abs() / scale);
    }
    worst
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
