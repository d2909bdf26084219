//! Activity segmentation of concatenated smart-space event streams.
//!
//! The pipeline encodes each event as a one-hot vector (optionally followed
//! by object-status features), slides an LSTM labeler over the stream one
//! event at a time, averages the overlapping per-event outputs, and marks an
//! event as a segment boundary when its boundary score beats its body score.
//! A time-interval pass then nudges boundaries onto the largest local gap
//! and removes boundaries that would leave too-short segments.
//!
//! A synthetic smart-room generator and an evaluation harness are included.

pub mod encoder;
pub mod error;
pub mod event;
pub mod harness;
pub mod lstm;
pub mod segmenter;
pub mod simgen;
pub mod validator;

pub use encoder::{encode_event, encode_stream, EncodedStream, InputVector, StatusAugmentation, StatusObject};
pub use error::{Error, Result};
pub use event::{
    apply_event, dataset_stats, state_trace, DatasetStats, Event, EventStream, EventType, Maxima,
    ObjectState, Vocabulary,
};
pub use lstm::{compute_target_weight, LstmModel, TrainingConfig, WindowSample};
pub use segmenter::{segment, Aggregation, SegmentationResult};
pub use validator::{validate, ValidatorConfig};
