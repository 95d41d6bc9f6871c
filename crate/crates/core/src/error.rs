use std::path::PathBuf;

use thiserror::Error;

use crate::tree::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid tree: {0}")]
    InvalidTree(Violation),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("nesting violation between {outer} and {inner}")]
    Nesting { outer: String, inner: String },

    #[error("sampler gave up after {iterations} iterations: {message}")]
    SamplerCap { iterations: u64, message: String },

    #[error("radial fit did not reach self-consistency (residual {residual:e})")]
    FitFailed { residual: f64 },

    #[error("faulty triple set: {0}")]
    Faulty(String),

    #[error("incomplete triple set: {0}")]
    IncompleteTripleSet(String),

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("replication {replication} at n = {n}: {source}")]
    Replication {
        n: usize,
        replication: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}
