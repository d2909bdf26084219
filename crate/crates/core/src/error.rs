use thiserror::Error;

/// Errors produced anywhere in the segmentation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown event name `{0}`")]
    UnknownEvent(String),

    #[error("event id {0} is outside the vocabulary (size {1})")]
    EventIdOutOfRange(usize, usize),

    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),

    #[error("invalid stream: {0}")]
    InvalidStream(String),

    #[error("stream carries no ground-truth activity labels")]
    MissingGroundTruth,

    #[error("no boundary events; the target weight must be supplied explicitly")]
    NoBoundaries,

    #[error("unknown augmentation flag `{0}`")]
    UnknownAugmentation(String),

    #[error("input width mismatch: model expects {expected}, encoder produces {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("non-finite input value at step {step}")]
    NonFiniteInput { step: usize },

    #[error("training diverged at epoch {epoch} (cost {cost})")]
    Diverged { epoch: usize, cost: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps an error with the name of the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
