use std::fmt;
use std::process::ExitCode;

/// CLI failure classes, each with its own exit code so scripts can tell
/// bad input (2) from I/O trouble (3) from numerical failure (4).
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::Io(_) => ExitCode::from(3),
            CliError::Numerical(_) => ExitCode::from(4),
        }
    }
}

impl From<plli_core::Error> for CliError {
    fn from(e: plli_core::Error) -> Self {
        match e {
            plli_core::Error::NumericalFailure => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
