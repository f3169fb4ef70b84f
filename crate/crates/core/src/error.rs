use thiserror::Error;

/// Errors raised by calibration, estimation and configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no root: objective does not cross target {target} on [{lo}, {hi}]")]
    NoRoot { target: f64, lo: f64, hi: f64 },

    #[error("bisection did not converge after {iterations} iterations (bracket [{lo}, {hi}])")]
    NonConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("at attenuation {atten_db} dB: {source}")]
    AtGridPoint {
        atten_db: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for configuration problems (as opposed to numerical failures).
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } => true,
            Error::AtGridPoint { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
