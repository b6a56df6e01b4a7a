use thiserror::Error;

/// Errors raised by the numerical routines and the state-file parser.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported matrix dimension {0} (only 2 and 4 are supported)")]
    UnsupportedDimension(usize),

    #[error("not a valid density matrix: {0}")]
    NotAState(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("measurement outcome has probability {probability:.3e}")]
    ZeroProbabilityOutcome { probability: f64 },

    #[error("optimizer did not converge after {iterations} iterations (step {step:.3e})")]
    OptimizerDidNotConverge { iterations: usize, step: f64 },

    #[error("{name} evaluated to {value:.3e}, below the clamping tolerance")]
    NegativeMeasure { name: &'static str, value: f64 },

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),

    #[error("malformed table {file}: {message}")]
    Table { file: String, message: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
