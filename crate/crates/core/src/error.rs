use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("subsystem label error: {0}")]
    Label(String),

    #[error("operator is not hermitian (max |A - A^dagger| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("{what} = {value} is outside the supported range (max {max})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("eigensolver failed (LAPACK info = {0})")]
    Eigensolver(i32),

    #[error("eigensolver returned eigenpairs that fail the residual check")]
    InaccurateEigenpairs,

    #[error("Hilbert space dimension {dim} exceeds the size guard of {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error(
        "CVS solver did not converge after {iterations} iterations \
         (alpha = {alpha}, S = {s}, residual = {residual:.3e})"
    )]
    NotConverged {
        iterations: usize,
        alpha: f64,
        s: f64,
        residual: f64,
    },

    #[error("{}", match .line { Some(l) => format!("config line {l}: {message}"), None => format!("config: {message}") })]
    Config {
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }
}
