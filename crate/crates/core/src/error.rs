use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("vector has zero norm")]
    ZeroVector,
    #[error("vector has no components")]
    EmptyVector,
    #[error("non-finite component at index {index}")]
    NonFinite { index: usize },
    #[error("explicit zero stored at sparse index {index}")]
    ExplicitZero { index: usize },
    #[error("sparse indices not strictly increasing at entry {position}")]
    UnsortedIndices { position: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("vector norm {norm} is not within tolerance of 1")]
    NotUnit { norm: f64 },
    #[error("similarity {0} outside [-1, 1]")]
    Domain(f64),
    #[error("invalid similarity interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("k = {k} out of range for dataset of size {n}")]
    BadK { k: usize, n: usize },
    #[error("pivot count {m} out of range for dataset of size {n}")]
    BadPivotCount { m: usize, n: usize },
    #[error("leaf capacity must be at least 1")]
    BadLeafCapacity,
    #[error("table holds {expected} rows but {actual} data vectors were supplied")]
    DataMismatch { expected: usize, actual: usize },
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("invalid benchmark config: {0}")]
    BadBenchConfig(String),
}

/// Failures reading datasets, surfaces or persisted indexes.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed index file: {message}")]
    Format { path: String, message: String },
    #[error("{path}: data checksum mismatch (stored {stored}, computed {computed})")]
    Checksum {
        path: String,
        stored: String,
        computed: String,
    },
    #[error("{path}: unsupported index version {version}")]
    Version { path: String, version: u32 },
    #[error(transparent)]
    Sim(#[from] SimError),
}
