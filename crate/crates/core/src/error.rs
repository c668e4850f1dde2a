use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("no free space on the map")]
    NoFreeSpace,

    #[error("position ({x:.3}, {y:.3}) is outside the map or blocked")]
    BlockedPosition { x: f64, y: f64 },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training failed: {0}")]
    Training(String),

    #[error("evaluation set must contain both classes")]
    SingleClass,

    #[error("planning failed: {0}")]
    Planning(String),

    #[error("start blocked")]
    StartBlocked,

    #[error("goal blocked")]
    GoalBlocked,

    #[error("re-planning failed: {0}")]
    Replanning(String),

    #[error("trajectory: {0}")]
    Trajectory(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit status: 2 bad scenario, 3 planning, 4 training, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Scenario(_) | Error::InvalidConfig(_) | Error::InvalidMap(_) => 2,
            Error::Planning(_)
            | Error::StartBlocked
            | Error::GoalBlocked
            | Error::Replanning(_)
            | Error::Trajectory(_)
            | Error::NoFreeSpace => 3,
            Error::Training(_) | Error::SingleClass => 4,
            _ => 1,
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
