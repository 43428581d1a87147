use std::path::PathBuf;

/// Failures of the file-level commands, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("scenario does not parse: {0}")]
    ScenarioSyntax(String),

    #[error("invalid scenario field `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error(transparent)]
    Core(#[from] dalmas_core::Error),

    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl ToString) -> Self {
        Error::Invalid { field: field.into(), message: message.to_string() }
    }

    /// 1 for scenario problems, 2 for unreadable or malformed traces, 3 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } => 3,
            Error::Trace { .. } => 2,
            Error::ScenarioSyntax(_) | Error::Invalid { .. } | Error::Core(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
