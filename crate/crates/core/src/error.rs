//! Error type shared by all modules of this crate.

use thiserror::Error;

/// Coarse error class, used by callers (e.g. the CLI) to map errors to
/// distinct exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input text: graph files, query expressions, class files.
    Parse,
    /// Filesystem access failed.
    Io,
    /// Inconsistent or out-of-domain parameters.
    Config,
    /// The operation was refused because it would be unreasonably costly.
    Refusal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    GraphParse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("syntax error at offset {pos}: {msg}")]
    Regex { pos: usize, msg: String },

    #[error("unknown macro ${name}")]
    UnknownMacro { name: String },

    #[error("class file line {line}: {msg}")]
    ClassFile { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("refusing to run: {0}")]
    Refusal(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::GraphParse { .. }
            | Error::Regex { .. }
            | Error::UnknownMacro { .. }
            | Error::ClassFile { .. } => ErrorClass::Parse,
            Error::Io { .. } => ErrorClass::Io,
            Error::Config(_) => ErrorClass::Config,
            Error::Refusal(_) => ErrorClass::Refusal,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
