use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CceError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    /// A similarity matrix failed validation at a specific entry.
    #[error("invalid similarity matrix at ({row}, {col}): {rule}")]
    Validation { row: usize, col: usize, rule: String },

    #[error("point {index} ({label}) has zero total similarity and cannot be normalized")]
    IsolatedPoint { index: usize, label: String },

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("diagonal is identically zero")]
    ZeroDiagonal,

    #[error("{}:{line}: {rule}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        rule: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CceError>;
