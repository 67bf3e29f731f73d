use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("degenerate case: {0}")]
    Degenerate(String),
    #[error("parameter out of scope: {0}")]
    OutOfScope(String),
    #[error("inadmissible witness: {0}")]
    Admissibility(String),
    #[error("probe cutoff violated: {0}")]
    Cutoff(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("blow-up detected; last valid time {last_valid_time}")]
    BlowUp { last_valid_time: f64 },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status used by the CLI: 2 for precondition failures, 3 for
    /// numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Fit(_) | Error::Numerical(_) | Error::BlowUp { .. } | Error::Io(_) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
