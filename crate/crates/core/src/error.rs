use thiserror::Error;

/// Errors produced by the library operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}")]
    NonHermitianInput { deviation: f64, tolerance: f64 },

    #[error("tuple lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("matrix size mismatch: expected {expected}x{expected}, found {rows}x{cols}")]
    DimensionMismatch { expected: usize, rows: usize, cols: usize },

    #[error("tuple length must be even to complexify, found {0}")]
    OddLength(usize),

    #[error("tuple must contain at least one entry of size at least 1")]
    EmptyTuple,

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerically ambiguous rank: singular value {singular_value:.3e} is within a decade of the cut {cut:.3e}")]
    ToleranceAmbiguity { singular_value: f64, cut: f64 },

    #[error("span is not a *-subalgebra: {0}")]
    NotAnAlgebra(String),

    #[error("approximator contract violated at step {step}: {detail}")]
    ApproximatorContractViolation { step: usize, detail: String },

    #[error("a noncommutative block algebra needs at least two tuple entries")]
    NeedTwoEntries,

    #[error("element does not lie in the block algebra: {0}")]
    NotInAlgebra(String),

    #[error("diagonal spectra are not separated: {0}")]
    SpectraNotSeparated(String),

    #[error("corner entry {index} is not positive and invertible: {detail}")]
    NotPositiveInvertible { index: usize, detail: String },

    #[error("construction failed its verification: {0}")]
    ConstructionFailed(String),

    #[error("invalid orbit type {omega} for n = {n}")]
    InvalidOmega { omega: String, n: usize },

    #[error("codimension cross-check failed for n = {n}, k = {k}: formula {formula}, enumeration {enumerated}")]
    FormulaMismatch { n: usize, k: usize, formula: usize, enumerated: usize },

    #[error("malformed algebra description: {0}")]
    MalformedDescription(String),

    #[error("invalid JSON input: {0}")]
    InvalidJson(String),
}

pub type Result<T> = std::result::Result<T, Error>;
