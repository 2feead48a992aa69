use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulation stack.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's shape or value precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A class needed for prototype classification has no support samples.
    #[error("missing class: {0}")]
    MissingClass(String),

    /// An IDX file failed to parse.
    #[error("format error in {field}: {detail}")]
    Format { field: &'static str, detail: String },

    /// Requested shard sizes exceed the dataset.
    #[error("capacity error: requested {requested} samples but dataset holds {available}")]
    Capacity { requested: usize, available: usize },

    /// Unknown node, unknown client, duplicate task or out-of-bounds report.
    #[error("registry error: {0}")]
    Registry(String),

    /// A required network path does not exist.
    #[error("topology error: {0}")]
    Topology(String),

    /// Every client task was infeasible in some round.
    #[error("resources exhausted in round {round}: {detail}")]
    Exhausted { round: usize, detail: String },

    /// Configuration failed schema or invariant validation.
    #[error("invalid config key `{key}` (line {line}): {message}")]
    Validation { key: String, line: usize, message: String },

    /// A data file that the run needs is absent.
    #[error("missing data file {path}")]
    MissingData { path: PathBuf },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
