use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value violates its documented contract.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An oracle returned a non-finite value.
    #[error("non-finite {what} at constraint index {index:?}")]
    NonFinite {
        what: &'static str,
        index: Option<usize>,
    },

    #[error("index {index} out of range for {len} constraints")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An inner iterate became non-finite.
    #[error("inner iterate became non-finite at iteration {iteration}")]
    NonFiniteIterate { iteration: u64 },

    /// The outer loop gave up because the inner solver kept missing its tolerance.
    #[error(
        "solver aborted at outer iteration {outer}: inner stationarity {achieved:e} \
         exceeded {factor}x the tolerance {eps:e} for {patience} consecutive iterations"
    )]
    SolverAbort {
        outer: usize,
        achieved: f64,
        eps: f64,
        factor: f64,
        patience: usize,
        report: Box<crate::report::RunReport>,
    },

    #[error("linear program is infeasible")]
    InfeasibleLp,

    #[error("linear program is unbounded")]
    UnboundedLp,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for errors caused by bad user input rather than solver behavior.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::DimensionMismatch { .. } | Error::IndexOutOfRange { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
