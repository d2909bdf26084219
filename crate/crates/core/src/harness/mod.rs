//! Splitting, scoring and experiment orchestration.

mod experiment;
mod metrics;
mod split;

pub use experiment::{
    ablation_grid, fit, grid_csv, run_experiment, run_on_stream, weight_sweep, CorpusSource,
    ExperimentOutcome, ExperimentReport, FittedModel, ExperimentSpec, GridRow, ModelShape, SweepPoint,
    SweepResult, ABLATION_AUGMENTATIONS,
};
pub use metrics::{score, score_with_tolerance, Metrics};
pub use split::split;
