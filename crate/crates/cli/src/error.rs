use std::fmt;
use std::path::Path;

/// Failure of a subcommand, carrying the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: exit 1.
    Usage(String),
    /// Unreadable or malformed input: exit 2.
    Data(String),
    /// Floating-point failure: exit 3.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    /// Wraps a library error raised while handling `path`.
    pub fn in_file(path: &Path, err: impl Into<mixtag::Error>) -> Self {
        let err = err.into();
        let msg = format!("{}: {err}", path.display());
        if err.is_numeric() {
            CliError::Numeric(msg)
        } else {
            CliError::Data(msg)
        }
    }

    pub fn lib(err: impl Into<mixtag::Error>) -> Self {
        let err = err.into();
        if err.is_numeric() {
            CliError::Numeric(err.to_string())
        } else {
            CliError::Data(err.to_string())
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
