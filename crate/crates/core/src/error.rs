use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by loading, scoring, mining, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file is {bytes} bytes, not divisible by the {row_bytes}-byte row size")]
    BadFileSize {
        path: PathBuf,
        bytes: u64,
        row_bytes: u64,
    },

    #[error("{path}: all-zero embedding rows at indices {rows:?}")]
    ZeroRows { path: PathBuf, rows: Vec<usize> },

    #[error("{path}: non-finite value in embedding row {row}")]
    NonFinite { path: PathBuf, row: usize },

    #[error("row {row} has zero norm and cannot be normalized")]
    ZeroNormRow { row: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("{what}: expected {expected} rows, got {actual}")]
    RowCountMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{path}:{line}: {msg}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: unknown sentence id {id:?}")]
    UnknownId {
        path: PathBuf,
        line: usize,
        id: String,
    },

    #[error("{path}:{line}: duplicate sentence id {id:?}")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },

    #[error("{path}:{line}: index {index} out of range for corpus of {rows} rows")]
    IndexOutOfRange {
        path: PathBuf,
        line: usize,
        index: usize,
        rows: usize,
    },

    #[error("pair references {side} row {index}, but the matrix has {rows} rows")]
    PairOutOfRange {
        side: &'static str,
        index: usize,
        rows: usize,
    },

    #[error("candidates are not sorted by descending score at position {position}")]
    UnsortedCandidates { position: usize },

    #[error("k must be at least 1, got {k}")]
    InvalidK { k: usize },

    #[error("matrix must be row-normalized before similarity search")]
    NotNormalized,

    #[error("text deduplication requires the database corpus")]
    MissingCorpus,

    #[error("the searched matrix has no rows")]
    EmptyDatabase,

    #[error("neighborhood is empty")]
    EmptyNeighborhood,

    #[error("ratio margin is undefined for a zero neighborhood mean")]
    DegenerateNeighborhood,

    #[error("filter needs a threshold, a top-n limit, or both")]
    EmptyFilterConfig,

    #[error("gold alignment is empty")]
    EmptyGold,

    #[error("candidate list is empty")]
    EmptyCandidates,

    #[error("more than one candidate for source {src}")]
    DuplicateSource { src: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
