use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed kernel: {0}")]
    MalformedKernel(String),

    #[error(
        "quadrature did not converge on [{lo}, {hi}]: estimate {estimate:e}, \
         achieved error {achieved:e} after {intervals} subintervals"
    )]
    Quadrature {
        lo: f64,
        hi: f64,
        estimate: f64,
        achieved: f64,
        intervals: usize,
    },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("operator assembly failed: {0}")]
    Assembly(String),

    #[error("exponential action failed: {0}")]
    ExpAction(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("table {}: {msg}", path.display())]
    Table { path: PathBuf, msg: String },

    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("study aborted: {0}")]
    Study(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
