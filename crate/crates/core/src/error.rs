use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inputs outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative solver exhausted its iteration budget.
    #[error("no convergence after {iterations} iterations (last iterates {last:?}, residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        last: [f64; 2],
        residual: f64,
    },

    /// A fixed-point update produced a non-positive or non-finite knot.
    #[error("fixed-point breakdown at knot {knot}: {reason}")]
    Breakdown { knot: usize, reason: String },

    /// Incompatible solver settings.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
