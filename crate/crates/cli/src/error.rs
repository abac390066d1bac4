use std::fmt;

use modschrod_core::Error as CoreError;

/// Exit 2 for bad invocations or unreadable inputs, exit 1 for failures
/// during computation or output.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

pub fn usage(flag: &str, message: impl fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {message}"))
}

/// Core errors raised while reading or validating user input.
pub fn input_error(flag: &str, e: CoreError) -> CliError {
    match e {
        CoreError::SolverNotConverged { .. } | CoreError::HistoryExhausted { .. } => {
            CliError::Runtime(e.into())
        }
        other => usage(flag, other),
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
