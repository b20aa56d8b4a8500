use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("dimension mismatch: expected {expected} modes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid mode selection: {0}")]
    InvalidModes(String),

    #[error("matrix is not symmetric (entry ({row}, {col}) differs by {diff:e})")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("covariance matrix violates the uncertainty principle (min symplectic eigenvalue {min_eigenvalue})")]
    NotBonaFide { min_eigenvalue: f64 },

    #[error("steering-party block is singular")]
    SingularBlock,

    #[error("square-root argument is not positive ({0:e}) in the frequency ratio")]
    NonPositiveRadicand(f64),

    #[error("no sign change of the shift parameter on [{lo}, {hi}] m")]
    NoBracket { lo: f64, hi: f64 },

    #[error("adaptive quadrature did not converge (estimated error {error:e} after {intervals} subintervals)")]
    QuadratureDiverged { error: f64, intervals: usize },

    #[error("constants file {path}: {message}")]
    Constants { path: PathBuf, message: String },

    #[error("cannot read constants file {path}: {source}")]
    ReadConstants {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("unknown figure preset `{0}` (expected fig1, fig2, fig3a, fig3b or fig4)")]
    UnknownFigure(String),

    #[error("grid point {index} ({point}): {source}")]
    GridPoint {
        index: usize,
        point: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for filesystem failures rather than bad inputs.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) | Error::ReadConstants { .. } => true,
            Error::GridPoint { source, .. } | Error::Stage { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
