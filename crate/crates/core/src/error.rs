//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by graph construction, solvers, generators and the
/// statistics engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop edge on node {node} is not allowed")]
    SelfLoop { node: usize },
    #[error("negative weight {weight} on edge ({from}, {to})")]
    NegativeWeight { from: usize, to: usize, weight: f64 },
    #[error("duplicate edge ({from}, {to})")]
    DuplicateEdge { from: usize, to: usize },
    #[error("node index {index} out of range 1..={node_count}")]
    NodeIndexOutOfRange { index: usize, node_count: usize },
    #[error("partition length {actual} does not match node count {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("graph has zero total weight; modularity is undefined")]
    ZeroTotalWeight,
    #[error("label vector is empty")]
    EmptyLabels,
    #[error("non-positive label at position {position}")]
    NonPositiveLabel { position: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("empty run list; at least one fitness value required")]
    EmptyRuns,
    #[error("missing result cell for algorithm {algorithm:?} on instance {instance:?}")]
    MissingCell { algorithm: String, instance: String },
    #[error("uneven run counts: cell ({algorithm}, {instance}) has {actual} runs, expected {expected}")]
    UnevenRuns {
        algorithm: String,
        instance: String,
        expected: usize,
        actual: usize,
    },
    #[error("unknown algorithm {0:?} (expected covns, pvns or svns)")]
    UnknownAlgorithm(String),
    #[error("malformed CSV row at line {line}: {message}")]
    MalformedCsvRow { line: u64, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
