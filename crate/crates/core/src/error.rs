use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used by front ends to pick exit codes and
/// HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input file or invalid ingest configuration.
    Ingestion,
    /// A request that cannot be satisfied by the data (bad index, empty
    /// dataset, missing support, unknown metric).
    Invalid,
    /// A synthetic-missingness request whose targets cannot be met.
    Feasibility,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(String),

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: u64,
        expected: usize,
        found: usize,
    },

    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),

    #[error("invalid ingest configuration: {0}")]
    InvalidConfig(String),

    #[error("variable `{variable}`, item {item}: `{value}` is not a finite number")]
    NotNumeric {
        variable: String,
        item: usize,
        value: String,
    },

    #[error("variable `{variable}` has {found} entries, expected {expected}")]
    LengthMismatch {
        variable: String,
        expected: usize,
        found: usize,
    },

    #[error("variable index {index} out of range (K = {count})")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("dataset has no items")]
    EmptyDataset,

    #[error("at least two variables are required, found {0}")]
    TooFewVariables(usize),

    #[error("variable `{0}` has no recorded values")]
    NoSupport(String),

    #[error("no values to bin")]
    EmptySample,

    #[error("value {0} is not finite")]
    NonFinite(f64),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("unknown aggregation `{0}` (expected mean, max or min)")]
    UnknownAggregation(String),

    #[error("metric `{metric}` is not available here: {reason}")]
    MetricUnavailable { metric: String, reason: String },

    #[error("invalid predicate `{0}`")]
    InvalidPredicate(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("input already has {0} missing cells; generators need a complete table")]
    NotComplete(usize),

    #[error("matrix file: {0}")]
    MatrixFormat(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Read { .. } | Error::Io(_) => ErrorKind::Io,
            Error::Csv(_)
            | Error::RaggedRow { .. }
            | Error::DuplicateVariable(_)
            | Error::InvalidConfig(_)
            | Error::NotNumeric { .. }
            | Error::LengthMismatch { .. }
            | Error::MatrixFormat(_) => ErrorKind::Ingestion,
            Error::InvalidSpec(_) | Error::Infeasible(_) | Error::NotComplete(_) => {
                ErrorKind::Feasibility
            }
            Error::IndexOutOfRange { .. }
            | Error::UnknownVariable(_)
            | Error::EmptyDataset
            | Error::TooFewVariables(_)
            | Error::NoSupport(_)
            | Error::EmptySample
            | Error::NonFinite(_)
            | Error::UnknownMetric(_)
            | Error::UnknownAggregation(_)
            | Error::MetricUnavailable { .. }
            | Error::InvalidPredicate(_) => ErrorKind::Invalid,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        match err.kind() {
            csv::ErrorKind::Io(_) => match err.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                _ => unreachable!(),
            },
            _ => Error::Csv(err.to_string()),
        }
    }
}
