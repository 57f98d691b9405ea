use std::path::PathBuf;

/// Errors produced anywhere in the recommender pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("unknown user key `{key}` (line {line})")]
    UnknownUser { key: String, line: usize },

    #[error("config `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged at epoch {epoch} (loss = {loss}); try a smaller learning rate")]
    Divergence { epoch: usize, loss: f64 },

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error("stale checkpoint: {0}")]
    StaleCheckpoint(String),

    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category, printed by the CLI on failure.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::EmptyCorpus(_) => "empty-corpus",
            Error::UnknownUser { .. } => "unknown-user",
            Error::Config { .. } => "config",
            Error::Index(_) => "index",
            Error::EmptyInput(_) => "empty-input",
            Error::Shape(_) => "shape",
            Error::Divergence { .. } => "divergence",
            Error::Evaluation(_) => "evaluation",
            Error::StaleCheckpoint(_) => "stale-checkpoint",
            Error::Checkpoint(_) => "checkpoint",
            Error::Invariant(_) => "invariant",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
