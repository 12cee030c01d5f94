use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph with {n} nodes has room for {available} extra edges, {requested} requested")]
    EdgeBudgetExceeded { n: usize, requested: usize, available: usize },

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { what: &'static str, iterations: usize, residual: f64 },

    #[error("invalid mixing matrix: {0}")]
    InvalidMixing(String),

    #[error("numerical divergence at iteration {iteration}: non-finite value in {quantity}")]
    Divergence { iteration: usize, quantity: &'static str },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("rate fit undefined: {0}")]
    RateFit(String),

    #[error("{label}: {source}")]
    Algorithm {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures caused by iterates blowing up rather than bad input.
    pub fn is_divergence(&self) -> bool {
        match self {
            Error::Divergence { .. } => true,
            Error::Algorithm { source, .. } => source.is_divergence(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
