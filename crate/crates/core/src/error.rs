use thiserror::Error;

use crate::basis::Partition;
use crate::solvers::GroundStateResult;

#[derive(Debug, Error)]
pub enum Error {
    /// A requested object would exceed a configured size limit or overflow
    /// the index type.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Inputs violate an operation's preconditions (wrong lengths, particle
    /// numbers, site indices, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Lanczos ran out of iterations; carries the best Ritz pair found.
    #[error("lanczos did not converge in {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Box<GroundStateResult>,
    },

    /// Amplitudes within one permutation orbit differ.
    #[error("state is not permutation symmetric: orbit {partition} spreads by {spread:.3e}")]
    Asymmetric { partition: Partition, spread: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn capacity(msg: impl Into<String>) -> Error {
    Error::Capacity(msg.into())
}
