use thiserror::Error;

use crate::conic::SolveStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A selected UE ended up with a zero rate or zero CPU frequency.
    #[error("infeasible timing for UE {ue}: {reason}")]
    InfeasibleTiming { ue: usize, reason: &'static str },

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("conic solver returned {status:?}: {detail}")]
    Solver { status: SolveStatus, detail: String },

    #[error("aborted after {0} consecutive solver failures: {1}")]
    RepeatedSolverFailure(usize, String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
