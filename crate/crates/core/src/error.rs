use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (expected 2..=6)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("code {code} does not fit in {bits} bits")]
    CodeOutOfRange { code: u64, bits: u32 },

    #[error("matrix index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("first column of matrix is not e_{expected}")]
    NotStandardForm { expected: usize },

    #[error("polynomial is not monic of degree {0}")]
    NotMonic(usize),

    #[error("invalid standard basis: {0}")]
    InvalidBasis(String),

    #[error("zero divisor: {x} * {y} = 0")]
    ZeroDivisor { x: u8, y: u8 },

    #[error("element must be nonzero")]
    ZeroElement,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
