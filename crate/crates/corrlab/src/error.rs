//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by constructors and operations.
///
/// Messages name the violated invariant so CLI callers can report it
/// verbatim.
#[derive(Debug, Error)]
pub enum Error {
    /// A finite space failed one of its construction invariants.
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    /// A joint distribution failed one of its construction invariants.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A function table failed one of its construction invariants.
    #[error("invalid function: {0}")]
    InvalidFunction(String),

    /// A coordinate or atom index was out of range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// An operation received an empty index subset where a nonempty one is
    /// required.
    #[error("empty subset: {0}")]
    EmptySubset(String),

    /// Conditioning on an atom of zero probability.
    #[error("zero-mass conditioning atom: {0}")]
    ZeroMassAtom(String),

    /// Mismatched dimensions between two arguments.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A scalar parameter was outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An exact-enumeration request exceeded the configured size cap.
    #[error("size cap exceeded: {0}")]
    SizeCapExceeded(String),
}

pub type Result<T> = std::result::Result<T, Error>;
