use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state size must be positive")]
    ZeroStateSize,

    #[error("state size {0} must be even for a half-spectrum parameterization")]
    OddStateSize(usize),

    #[error("output map C has not been initialized")]
    MissingOutputMap,

    #[error("sequence length must be at least 1")]
    EmptySequence,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("singular matrix (zero pivot in column {0})")]
    Singular(usize),

    #[error("singular resolvent: 1 - (dt/2) * A vanishes at index {0}")]
    SingularResolvent(usize),

    #[error("invalid timescale: {0}")]
    InvalidTimescale(String),

    #[error("eigenvalue {index} has real part {re}, violating the exp left-half-plane constraint")]
    UnstableEigenvalue { index: usize, re: f64 },

    #[error("softmax normalization requires ZOH discretization")]
    SoftmaxNeedsZoh,

    #[error("degenerate Vandermonde row {0}: row sum vanishes")]
    DegenerateRow(usize),

    #[error("FFT convolution left an imaginary residue {residue:.3e} (output scale {scale:.3e})")]
    ImaginaryResidue { residue: f64, scale: f64 },

    #[error("signal has no channels or ragged channels")]
    BadSignal,

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("unknown initialization `{0}`")]
    UnknownInit(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
