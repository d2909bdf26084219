//! Single-hidden-layer LSTM sequence labeler trained with backpropagation
//! through time on a squared-error cost with weighted boundary targets.

mod file;
mod model;
mod train;
mod window;

pub use file::{ModelFile, ModelMeta, MODEL_FORMAT, MODEL_VERSION};
pub use model::{loss, BackwardScratch, ForwardPass, LstmModel, Params, GATE_NAMES};
pub use train::{compute_target_weight, mean_cost, train, Optimizer, TrainingConfig, TrainingOutcome, ValidationHook};
pub use window::WindowSample;
