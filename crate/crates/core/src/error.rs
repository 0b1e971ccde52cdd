use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input violates a domain invariant (bad distribution, index out of range, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A dimension exceeds what the dense path or the integer multiplicities can hold.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// The ratio form of the conditional entropy has a vanishing denominator.
    #[error("singular denominator in conditional entropy: |1 + (1-q) S_q(A)| = {0:e}")]
    Singularity(f64),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// The boundary x*(q) increased between two consecutive grid points.
    #[error(
        "threshold not monotone in q: x*({q_prev}) = {x_prev} < x*({q_next}) = {x_next}"
    )]
    NonMonotone {
        q_prev: f64,
        x_prev: f64,
        q_next: f64,
        x_next: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
