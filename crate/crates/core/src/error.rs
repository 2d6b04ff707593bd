use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    /// Adaptive quadrature stopped before reaching its target tolerance.
    #[error("quadrature for {quantity} did not converge: achieved {achieved:e}, target {target:e}")]
    Quadrature {
        quantity: &'static str,
        achieved: f64,
        target: f64,
    },

    /// An observation that is NaN or infinite was offered to a recursion.
    #[error("non-finite observation {value} at index {index}")]
    NonFinite { index: u64, value: f64 },

    /// A replicate produced a non-finite estimate.
    #[error("replicate {replicate} diverged at step {step}: {detail}")]
    Diverged {
        replicate: u64,
        step: u64,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
