use std::path::PathBuf;

use thiserror::Error;

use crate::graph::{EdgeKind, NodeKind};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid node id {0:?}: must be non-empty and contain ':'")]
    InvalidNodeId(String),

    #[error("node {id:?} already registered as {existing:?}, cannot re-add as {requested:?}")]
    KindConflict {
        id: String,
        existing: NodeKind,
        requested: NodeKind,
    },

    #[error("unknown node {0:?}")]
    UnknownNode(String),

    #[error("unknown seed {0:?}")]
    UnknownSeed(String),

    #[error("{kind:?} edge {src:?} -> {dst:?} requires {expected_src:?} -> {expected_dst:?}")]
    EndpointKindMismatch {
        src: String,
        dst: String,
        kind: EdgeKind,
        expected_src: NodeKind,
        expected_dst: NodeKind,
    },

    #[error("self-loop on {0:?}")]
    SelfLoop(String),

    #[error("edge {src:?} -> {dst:?} already present with kind {existing:?}")]
    ParallelEdge {
        src: String,
        dst: String,
        existing: EdgeKind,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {malformed} of {total} rows malformed (limit 1%)")]
    TooManyMalformedRows {
        path: PathBuf,
        malformed: usize,
        total: usize,
    },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("graph is empty")]
    EmptyGraph,

    #[error("graph too small: {nodes} nodes, need at least {required}")]
    GraphTooSmall { nodes: usize, required: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid fraction: {0}")]
    InvalidFraction(String),

    #[error("component labelings do not match: {0}")]
    ModeMismatch(String),

    #[error("need at least {required} positive samples, got {got}")]
    TooFewSamples { got: usize, required: usize },

    #[error("all samples equal {0}; no tail to fit")]
    DegenerateSample(u64),

    #[error("histogram has no positive degrees")]
    EmptyHistogram,

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
