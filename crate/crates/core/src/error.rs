use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least {required} points, got {got}")]
    TooFewPoints { required: usize, got: usize },

    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value at {context}")]
    NonFinite { context: String },

    #[error("invalid distance matrix: {0}")]
    InvalidDistanceMatrix(String),

    #[error("perfect matching requires an even number of points, got {0}")]
    OddPointCount(usize),

    #[error("brute-force matching refuses n = {n} (limit {limit})")]
    BruteForceTooLarge { n: usize, limit: usize },

    #[error("sample sizes m = {m}, n = {n} violate the parity requirement (m + n even, m, n >= 1)")]
    Parity { m: usize, n: usize },

    #[error("{path}: row {row}: {message}")]
    Schema {
        path: String,
        row: usize,
        message: String,
    },

    #[error("invalid trajectory data: {0}")]
    InvalidTrajectory(String),

    #[error("trajectory store is empty")]
    EmptyStore,

    #[error("no trajectories for problem '{problem}' at dimension {dimension}")]
    MissingKey { problem: String, dimension: usize },

    #[error("trajectories are not comparable: {0}")]
    Incomparable(String),

    #[error("unknown algorithm '{0}'")]
    UnknownAlgorithm(String),

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("budget of {budget} evaluations gives fewer than 2 iterations at population size {n_pop}")]
    BudgetTooSmall { budget: usize, n_pop: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid similarity matrix: {0}")]
    InvalidMatrix(String),

    #[error("unknown export format '{0}'")]
    UnknownFormat(String),

    #[error("unsupported file extension for {0}")]
    UnsupportedExtension(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from caller-supplied data or configuration
    /// rather than from a failure inside the library.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { source, .. } => matches!(
                source.kind(),
                std::io::ErrorKind::NotFound | std::io::ErrorKind::InvalidData
            ),
            _ => true,
        }
    }
}
