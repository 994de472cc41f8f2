use thiserror::Error;

/// Errors produced by histogram validation, the solvers and the file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input is empty")]
    Empty,

    #[error("negative mass at bin {0}")]
    NegativeMass(usize),

    #[error("masses sum to {0}, expected 1")]
    BadSum(f64),

    #[error("a histogram needs at least 2 bins, got {0}")]
    TooFewBins(usize),

    #[error("total mass is zero")]
    ZeroTotalMass,

    #[error("quantile level {0} is outside (0, 1]")]
    OutOfRange(f64),

    #[error("index {index} out of range for {n} bins")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("ground metric `{0}` is not convex in arc length")]
    NonConvexSpec(String),

    /// Reserved for diagnostics; quantization repairs underflowing bins.
    #[error("bin {0} rounds to zero units")]
    QuantizationUnderflow(usize),

    #[error("Gibbs kernel underflows at reg = {0}; use log-domain updates")]
    NumericalUnderflow(f64),

    #[error("class {0} has no feature vectors")]
    EmptyClass(usize),

    #[error("round {round} out of range for a schedule of {total} rounds")]
    RoundOutOfRange { round: usize, total: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
