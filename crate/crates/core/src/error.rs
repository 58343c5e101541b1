use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("normalised coordinate {0} outside [0, 1]")]
    CoordinateOutOfRange(f64),

    #[error("invalid disease parameters: {0}")]
    InvalidDisease(String),

    #[error("unknown vessel chain {0}")]
    UnknownChain(String),

    #[error("disease {kind} cannot be placed in chain {chain}")]
    ChainMismatch { kind: String, chain: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("requested {requested} harmonics but the inflow only carries {available}")]
    NotEnoughHarmonics { requested: usize, available: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("measurement site {0} missing")]
    MissingSite(String),

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("solver did not converge after {iterations} iterations (gradient norm {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("operation requires a {expected} model, got {got}")]
    WrongModel {
        expected: &'static str,
        got: &'static str,
    },

    #[error("model has no splits; importance undefined")]
    NoSplits,

    #[error("empty grid")]
    EmptyGrid,

    #[error("no grid is defined for method {0}")]
    NoGridForMethod(String),

    #[error("invalid split plan: {0}")]
    InvalidPlan(String),

    #[error("incomplete report: {0}")]
    IncompleteReport(String),

    #[error("mismatched reports: {0}")]
    MismatchedReports(String),

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("import failed with {} row error(s); first: {}", .0.len(), .0.first().map(String::as_str).unwrap_or(""))]
    ImportRows(Vec<String>),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
