use std::path::PathBuf;

use thiserror::Error;

/// Every failure the simulator can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("length mismatch: field has {found} samples, grid has {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid initial state: {0}")]
    InitialState(String),

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("position {x} lies outside the domain [{x_min}, {x_max}]")]
    OutsideDomain { x: f64, x_min: f64, x_max: f64 },

    #[error("region [{lo}, {hi}] carries norm {norm:.3e}, below the floor {floor:.1e}")]
    EmptyRegion { lo: f64, hi: f64, norm: f64, floor: f64 },

    #[error("need at least {needed} samples, got {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("field became non-finite at t = {t}")]
    BlowUp { t: f64 },

    #[error("norm loss did not settle before t_max = {t_max}")]
    NotQuiescent { t_max: f64 },

    #[error("unknown figure preset `{0}`")]
    UnknownPreset(String),

    #[error("scenario `{label}`: {source}")]
    Scenario {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Strips scenario labels to reach the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::Scenario { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
