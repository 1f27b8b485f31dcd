use thiserror::Error;

use crate::algebra::Half;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Cluster with u > r (photon-rich regime) or a spin sector other than r = N/2.
    #[error("unsupported regime: {0}")]
    Unsupported(String),

    /// A ladder coupling t_n vanished inside the chain, so the three-term
    /// recursion cannot be continued past `index`.
    #[error("degenerate chain: coupling t_{index} is zero")]
    DegenerateChain { index: usize },

    #[error("singular c0/c3 ratio: denominator is zero at eps = {eps}")]
    SingularRatio { eps: f64 },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("fock truncation n_max = {n_max} too small for u = {u} (need at least {required})")]
    Truncation { u: Half, n_max: usize, required: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
