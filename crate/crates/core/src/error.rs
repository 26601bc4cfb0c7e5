use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("operation not supported on this search space: {0}")]
    UnsupportedSpace(&'static str),

    #[error("requested {requested} samples but only {available} candidates exist")]
    Capacity { requested: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("input {value} in dimension {dim} lies outside [{lo}, {hi}]")]
    OutOfBounds {
        dim: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("candidate index {index} out of range ({count} candidates)")]
    UnknownCandidate { index: usize, count: usize },

    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("kernel matrix not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("need at least {needed} observations, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("every (candidate, fidelity) pair has already been queried")]
    Exhausted,

    #[error("{0}")]
    Mode(String),

    #[error("no high-fidelity observation within the first single-fidelity budget {budget}")]
    Alignment { budget: f64 },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("observed value {observed} exceeds the declared optimum {optimum}")]
    OptimumExceeded { observed: f64, optimum: f64 },

    #[error("{context}: row {row}, column `{column}`: {message}")]
    Parse {
        context: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{context}: missing column `{column}`")]
    MissingColumn { context: String, column: String },

    #[error("{context}: duplicate candidate id `{id}` at row {row}")]
    DuplicateId {
        context: String,
        row: usize,
        id: String,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("seed {seed}: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Strips seed attribution wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Seed { source, .. } => source.root(),
            other => other,
        }
    }
}
