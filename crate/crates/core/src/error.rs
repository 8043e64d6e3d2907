use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown mode label {0}")]
    UnknownMode(String),
    #[error("duplicate mode label {0} in register")]
    DuplicateMode(String),
    #[error("operands live on different registers")]
    RegisterMismatch,
    #[error("the set of kept modes is empty")]
    EmptyKeep,
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("photon cutoff {cutoff} is too small, {needed} required")]
    Cutoff { cutoff: u32, needed: u32 },
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("measurement outcome has zero probability")]
    ZeroProbability,
    #[error("vector has zero norm")]
    ZeroNorm,
    #[error("state is not maximally entangled")]
    NotMaximallyEntangled,
    #[error("state is not pure")]
    NotPure,
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
