use std::fmt;

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Core(twowell::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<twowell::Error> for CliError {
    fn from(e: twowell::Error) -> Self {
        CliError::Core(e)
    }
}
