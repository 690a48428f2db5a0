//! Error type shared across the pipeline.

use thiserror::Error;

/// All failure modes of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A JSONL line could not be turned into a commit record.
    #[error("{message}, line {line}")]
    Parse { line: usize, message: String },

    /// The `git` executable could not be found on the search path.
    #[error("git executable not found: {0}")]
    GitMissing(String),

    /// A git subprocess exited nonzero; stderr is embedded.
    #[error("git {command} failed: {stderr}")]
    Git { command: String, stderr: String },

    /// Bad user input: unreadable paths, malformed config, unknown ids.
    #[error("{0}")]
    Input(String),

    /// The requested profile cannot support complexity counting.
    #[error("complexity unavailable: {0}")]
    ComplexityUnavailable(String),

    /// A caller violated an operation's precondition.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Not enough observed samples to fit a rate model.
    #[error("{0}")]
    InsufficientData(String),

    /// An argument fell outside a function's numeric domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Synthetic-history parameters cannot be realized.
    #[error("invalid parameters: {0}")]
    Params(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Wraps an error with the name of the pipeline stage that produced it.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach a pipeline stage name to this error.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True when the root cause is an `InsufficientData` error, looking
    /// through any stage wrappers. Drives the CLI exit code.
    pub fn is_insufficient_data(&self) -> bool {
        match self {
            Error::InsufficientData(_) => true,
            Error::Stage { source, .. } => source.is_insufficient_data(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
