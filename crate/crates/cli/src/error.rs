use std::fmt;

/// Failure classes, each with its own process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad syntax, unknown keys or malformed quantities.
    Parse(String),
    /// Well-formed scenario with inconsistent or unsupported content.
    Validation(String),
    /// Engine failure while evaluating.
    Numerical(String),
    /// Unreadable input or unwritable output.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn field(field: &str, msg: impl fmt::Display) -> Self {
        CliError::Validation(format!("{field}: {msg}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "parse error: {msg}"),
            CliError::Validation(msg) => write!(f, "invalid scenario: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical error: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

impl From<fdabeam::Error> for CliError {
    fn from(err: fdabeam::Error) -> Self {
        CliError::Numerical(err.to_string())
    }
}
