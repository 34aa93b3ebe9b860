use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown material category `{0}` (expected Aluminum, Steel or Titanium)")]
    UnknownMaterial(String),

    #[error("invalid tube section: inner diameter {inner_diameter} m, thickness {thickness} m")]
    InvalidSection { inner_diameter: f64, thickness: f64 },

    #[error("design is geometrically infeasible: {0}")]
    InfeasibleDesign(String),

    #[error("invalid sample request: {0}")]
    InvalidSampleRequest(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("no feasible designs among {requested} samples; check the `ranges` and `limits` config sections")]
    EmptyBatch { requested: usize },

    #[error("mesh error: {0}")]
    MeshError(String),

    #[error("mechanism detected: stiffness matrix singular at equation {equation} (missing constraints or disconnected frame)")]
    MechanismDetected { equation: usize },

    #[error("simulation of design {design_id} failed: {source}")]
    SimulationFailure {
        design_id: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid stability input: {0}")]
    InvalidStabilityInput(String),

    #[error("incomplete record for design {design_id}: missing {field}")]
    IncompleteRecord { design_id: u64, field: &'static str },

    #[error("insufficient data: {usable} usable rows, need at least {required}")]
    InsufficientData { usable: usize, required: usize },

    #[error("encoding error: {0}")]
    EncodingError(String),

    #[error("no counterfactuals found; unmet targets: {}", unmet.join(", "))]
    NoCounterfactualsFound { unmet: Vec<String> },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid configuration `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("model file {path}: {message}")]
    Model { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
