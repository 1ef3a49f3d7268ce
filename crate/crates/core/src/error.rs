use thiserror::Error;

/// Errors produced by library operations.
///
/// Checker-style operations (`check_algebra`, `check_assoc`, ...) report
/// violations through their report types instead of this enum; `Error` is for
/// conditions that make an operation impossible or meaningless.
#[derive(Debug, Error)]
pub enum Error {
    #[error("variable `{0}` is not assigned")]
    UnassignedVariable(String),
    #[error("inexact division by {0} in Witt polynomial recursion")]
    InexactDivision(String),
    #[error("mismatched primes: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("mismatched truncation degrees: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("degree shift by {0} is unsupported (only i >= -1)")]
    BadShift(i64),
    #[error("duplicate basis name `{0}`")]
    DuplicateBasisName(String),
    #[error("unknown basis element `{0}`")]
    UnknownBasisElement(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("witt vector entry of degree {0} escapes the image of the carrier in its hull (carrier is not p-polar)")]
    NotInImage(usize),
    #[error("degree-0 part is not nilpotent and no stage bound was given")]
    NonNilpotentDegreeZero,
    #[error("p = 2 is not supported by the Dyer-Lashof rewriting engine")]
    PrimeTwoUnsupported,
    #[error("top-range Cartan expansion (2r = q + n) requires the Gamma correction, which is unsupported")]
    TopRangeCartan,
    #[error("length {0} exceeds the configured Witt length bound {1}")]
    WittLengthBound(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
