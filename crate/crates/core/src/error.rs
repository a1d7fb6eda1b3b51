use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("conflicting ratings for user {user:?} on item {item:?} at lines {first_line} and {second_line}")]
    DuplicateRating {
        user: String,
        item: String,
        first_line: u64,
        second_line: u64,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("over-filtered: no ratings survive thresholds (users >= {min_user_ratings}, items >= {min_item_ratings})")]
    OverFiltered {
        min_user_ratings: usize,
        min_item_ratings: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{algorithm} diverged: non-finite loss at iteration {iteration}")]
    NonFiniteLoss { algorithm: String, iteration: usize },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
