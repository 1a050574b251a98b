use std::fmt;

use cmdp::{FormatError, GridError, ModelError, SimError, SolveError, StrategyError};

/// Exit status 1 for domain errors, 2 for usage and parse errors.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Domain(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) | CliError::Parse(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        if e.is_parse_error() {
            CliError::Parse(e.to_string())
        } else {
            CliError::Domain(e.to_string())
        }
    }
}

impl From<StrategyError> for CliError {
    fn from(e: StrategyError) -> Self {
        match e {
            StrategyError::Json(_) => CliError::Parse(format!("strategy: {e}")),
            other => CliError::Domain(format!("strategy: {other}")),
        }
    }
}

macro_rules! domain {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Domain(e.to_string())
            }
        }
    )*};
}

domain!(ModelError, SolveError, SimError, GridError);
