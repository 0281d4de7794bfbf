use std::fmt;

use thiserror::Error;

/// A (item id, question index, candidate index) triple with no statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingStatement {
    pub item_id: String,
    pub question: usize,
    pub candidate: usize,
}

impl fmt::Display for MissingStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, q{}, c{})",
            self.item_id, self.question, self.candidate
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("statement coverage error: {} missing, first {}", .0.len(), .0.first().map(|m| m.to_string()).unwrap_or_default())]
    Coverage(Vec<MissingStatement>),

    #[error("embedding format error at line {line}: {msg}")]
    EmbeddingFormat { line: usize, msg: String },

    #[error("embedding file is empty")]
    EmptyEmbeddings,

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
