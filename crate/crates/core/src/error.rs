use serde::Serialize;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("agent index {index} out of range for {n} agents")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("game is not normalized: {0}")]
    NotNormalized(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("optimal action vector has a zero coordinate at agent {index}")]
    BoundaryOptimum { index: usize },

    #[error("game is not uniform: {0}")]
    NotUniform(String),

    #[error("bracket [{lo}, {hi}] does not enclose a sign change")]
    Bracket { lo: f64, hi: f64 },

    #[error("not computable: {0}")]
    NotComputable(String),

    #[error("brute force refused: {n} agents exceeds the limit of 3")]
    TooLarge { n: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::InvalidGame(_) => "invalid_game",
            Error::Domain(_) => "domain",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::NotConverged { .. } => "not_converged",
            Error::NotNormalized(_) => "not_normalized",
            Error::AssumptionViolated(_) => "assumption_violated",
            Error::BoundaryOptimum { .. } => "boundary_optimum",
            Error::NotUniform(_) => "not_uniform",
            Error::Bracket { .. } => "bracket",
            Error::NotComputable(_) => "not_computable",
            Error::TooLarge { .. } => "too_large",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    pub fn to_report(&self) -> ErrorReport {
        ErrorReport {
            kind: self.kind(),
            message: self.to_string(),
        }
    }
}

/// Serializable form of an [`Error`], used for machine-readable failure output.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}
