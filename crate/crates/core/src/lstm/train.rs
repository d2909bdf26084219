use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{loss, BackwardScratch, ForwardPass, LstmModel, Params};
use super::window::WindowSample;
use crate::error::{Error, Result};
use crate::event::DatasetStats;

/// Boundary target weight `sqrt((e_total - e_boundary) / e_boundary)`.
pub fn compute_target_weight(stats: DatasetStats) -> Result<f64> {
    if stats.e_boundary == 0 {
        return Err(Error::NoBoundaries);
    }
    if stats.e_boundary > stats.e_total {
        return Err(Error::InvalidConfig(format!(
            "{} boundaries exceed {} events",
            stats.e_boundary, stats.e_total
        )));
    }
    let body = (stats.e_total - stats.e_boundary) as f64;
    Ok((body / stats.e_boundary as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    GradientDescent,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    /// Boundary target weight.
    pub omega: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub optimizer: Optimizer,
    /// Windows per parameter update.
    pub batch_size: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            omega: 1.0,
            learning_rate: 1e-3,
            epochs: 30,
            seed: 0,
            patience: 5,
            optimizer: Optimizer::default(),
            batch_size: 8,
        }
    }
}

impl TrainingConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidConfig(format!("omega must be >= 0, got {}", self.omega)));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub model: LstmModel,
    /// Entry 0 is the mean per-window cost before training; entry `e` is the
    /// mean cost observed while running epoch `e`.
    pub cost_curve: Vec<f64>,
    /// Validation F1 after each epoch, when a validation hook was supplied.
    pub validation_f1: Vec<f64>,
    /// Epoch whose parameters were kept (0 = untouched initial model).
    pub best_epoch: usize,
}

/// Parameter update rule with its running state.
struct Stepper {
    optimizer: Optimizer,
    lr: f64,
    first: Params,
    second: Params,
    t: i32,
}

impl Stepper {
    fn new(optimizer: Optimizer, lr: f64, like: &Params) -> Self {
        let mut zeros = like.clone();
        zeros.fill(0.0);
        Stepper {
            optimizer,
            lr,
            first: zeros.clone(),
            second: zeros,
            t: 0,
        }
    }

    fn step(&mut self, params: &mut Params, grads: &Params) {
        match self.optimizer {
            Optimizer::GradientDescent => {
                for (p, g) in params.iter_mut().zip(grads.iter()) {
                    *p -= self.lr * g;
                }
            }
            Optimizer::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                self.t += 1;
                let c1 = 1.0 - beta1.powi(self.t);
                let c2 = 1.0 - beta2.powi(self.t);
                let moments = self.first.iter_mut().zip(self.second.iter_mut());
                for ((p, g), (m, v)) in params.iter_mut().zip(grads.iter()).zip(moments) {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + epsilon);
                }
            }
        }
    }
}

/// Mean loss of `model` over `samples`.
pub fn mean_cost(model: &LstmModel, samples: &[WindowSample<'_>]) -> Result<f64> {
    let mut pass = ForwardPass::default();
    let mut total = 0.0;
    for w in samples {
        model.forward_into(w, &mut pass)?;
        total += loss(&pass.outputs, w);
    }
    Ok(total / samples.len().max(1) as f64)
}

/// Scores a model on held-out data; higher is better.
pub type ValidationHook<'a> = dyn FnMut(&LstmModel) -> Result<f64> + 'a;

/// Trains `model` on labeled windows.
///
/// Every epoch visits the windows in a freshly shuffled order (seeded by
/// `config.seed`) and applies one update per `batch_size` windows. With a
/// `validate` hook the parameters of the epoch with the best returned score
/// are kept and training stops after `patience` epochs without improvement.
pub fn train(
    model: LstmModel,
    samples: &[WindowSample<'_>],
    config: &TrainingConfig,
    mut validate: Option<&mut ValidationHook<'_>>,
) -> Result<TrainingOutcome> {
    config.check()?;
    if samples.is_empty() {
        return Err(Error::InvalidConfig("no training windows".into()));
    }
    let mut model = model;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut stepper = Stepper::new(config.optimizer, config.learning_rate, model.params());
    let mut grads = model.params().clone();
    let mut pass = ForwardPass::default();
    let mut scratch = BackwardScratch::default();

    let initial = mean_cost(&model, samples)?;
    if !initial.is_finite() {
        return Err(Error::Diverged {
            epoch: 0,
            cost: initial,
        });
    }
    let mut cost_curve = vec![initial];
    let mut validation_f1 = Vec::new();
    let mut best: Option<(f64, usize, Params)> = None;
    if let Some(hook) = validate.as_mut() {
        let f1 = hook(&model)?;
        best = Some((f1, 0, model.params().clone()));
    }

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.fill(0.0);
            for &i in batch {
                let w = &samples[i];
                model.forward_into(w, &mut pass)?;
                total += loss(&pass.outputs, w);
                model.accumulate_gradients(w, &pass, &mut grads, &mut scratch);
            }
            grads.scale(1.0 / batch.len() as f64);
            stepper.step(model.params_mut(), &grads);
        }
        let cost = total / samples.len() as f64;
        if !cost.is_finite() || model.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged { epoch, cost });
        }
        cost_curve.push(cost);

        if let Some(hook) = validate.as_mut() {
            let f1 = hook(&model)?;
            validation_f1.push(f1);
            let (best_f1, best_epoch, _) = best.as_ref().expect("seeded before the loop");
            if f1 > *best_f1 {
                best = Some((f1, epoch, model.params().clone()));
            } else if epoch - best_epoch >= config.patience {
                break;
            }
        }
    }

    let best_epoch = match best {
        Some((_, epoch, params)) => {
            *model.params_mut() = params;
            epoch
        }
        None => cost_curve.len() - 1,
    };
    Ok(TrainingOutcome {
        model,
        cost_curve,
        validation_f1,
        best_epoch,
    })
}
