use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spectrum violation at mode {index}: eigenvalue {value} {reason}")]
    SpectrumViolation {
        index: usize,
        value: Complex64,
        reason: &'static str,
    },

    #[error("matrix is not stable: eigenvalue {0} has nonnegative real part")]
    NotStable(Complex64),

    #[error("eigenbasis condition number {condition:.3e} exceeds ceiling {ceiling:.3e}")]
    IllConditionedEigenbasis { condition: f64, ceiling: f64 },

    #[error("matrix is not diagonalizable: reconstruction residual {residual:.3e}")]
    NotDiagonalizable { residual: f64 },

    #[error("evaluation point {z} is within {distance:.3e} of the spectrum")]
    SpectrumHit { z: Complex64, distance: f64 },

    #[error("need at least {needed} spectrum points in the window, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error:.3e})")]
    NoConvergence { subdivisions: usize, error: f64 },

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("argument outside domain: {0}")]
    DomainError(String),

    #[error("power {n} exceeds the horizon {horizon}")]
    HorizonExceeded { n: u64, horizon: u64 },

    #[error("operation requires a diagonal operator")]
    NonDiagonal,

    #[error("Lyapunov solution computed at xi = {found}, expected {expected}")]
    MismatchedXi { expected: f64, found: f64 },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("experiment `{experiment}` failed: {source}")]
    Experiment {
        experiment: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn in_experiment(self, experiment: &str) -> Self {
        match self {
            e @ Error::Config { .. } => e,
            e => Error::Experiment {
                experiment: experiment.to_string(),
                source: Box::new(e),
            },
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
