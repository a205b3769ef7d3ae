//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A series violated a structural invariant (ordering, finiteness, length).
    #[error("invalid series `{label}`: {reason}")]
    InvalidSeries { label: String, reason: String },

    /// A transform met a value it cannot handle (e.g. non-positive price).
    #[error("non-positive value {value} at index {index} in `{label}`; {context}")]
    NonPositiveValue {
        label: String,
        index: usize,
        value: f64,
        context: String,
    },

    /// Too few observations for the requested operation.
    #[error("insufficient data: need {required}, got {actual} ({context})")]
    InsufficientData {
        required: usize,
        actual: usize,
        context: String,
    },

    /// Timestamp intersection of a pair is too small to analyze.
    #[error(
        "insufficient overlap: x has {x_len} observations, y has {y_len}, \
         common timestamps {overlap} < required {required}"
    )]
    InsufficientOverlap {
        x_len: usize,
        y_len: usize,
        overlap: usize,
        required: usize,
    },

    /// A scale or q grid violated its invariants.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// An invalid parameter value was supplied.
    #[error("invalid parameter {name} = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: String,
    },

    /// A numerical routine could not produce a finite result.
    #[error("numerical failure in {context}")]
    Numerical { context: String },

    /// Every segment of a fluctuation computation degenerated to zero.
    #[error("degenerate fluctuation surface at scale {scale}: all {segments} segments detrend to zero")]
    DegenerateSurface { scale: usize, segments: usize },

    /// A constant series makes the requested statistic undefined.
    #[error("degenerate input for {context}: series `{label}` has zero variance")]
    ZeroVariance { label: String, context: String },

    /// CSV rows that could not be parsed, with 1-based line numbers.
    #[error("unparseable rows in {path}: lines {lines:?} ({detail})")]
    CsvParse {
        path: String,
        lines: Vec<usize>,
        detail: String,
    },

    /// Missing or unusable CSV column.
    #[error("column `{column}` not found in {path}; header has {available:?}")]
    CsvColumn {
        path: String,
        column: String,
        available: Vec<String>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    /// Surrogate generation failed for a specific ensemble member.
    #[error("surrogate member {index} (seed {seed}) failed: {source}")]
    SurrogateMember {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
