use std::path::PathBuf;

use crate::llm_client::ClientError;
use crate::prompting::PromptVariant;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("corpus error at {path}: {message}")]
    Corpus { path: PathBuf, message: String },

    #[error("transport error while processing {pair_id}: {source}")]
    Transport {
        pair_id: String,
        #[source]
        source: ClientError,
    },

    #[error("{} fixture miss(es) in replay mode: {}", .0.len(), format_misses(.0))]
    FixtureMiss(Vec<FixtureMiss>),

    #[error("label error: {0}")]
    Label(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("report error: {0}")]
    Report(String),

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("variant {variant}: {source}")]
    Variant {
        variant: PromptVariant,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A replay lookup that found no stored response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureMiss {
    pub pair_id: String,
    pub key: String,
}

fn format_misses(misses: &[FixtureMiss]) -> String {
    misses
        .iter()
        .map(|m| format!("{} (key {})", m.pair_id, m.key))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI. Codes are documented in `docdrift --help`.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Corpus { .. } => 3,
            Error::Transport { .. } => 4,
            Error::FixtureMiss(_) => 5,
            Error::Label(_) | Error::Evaluation(_) => 6,
            Error::Variant { source, .. } => source.exit_code(),
            Error::Report(_) | Error::Format { .. } | Error::Io { .. } | Error::Json(_) => 1,
        }
    }
}
