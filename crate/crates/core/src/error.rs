use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown edge type `{0}`")]
    UnknownEdgeType(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("node id {id} out of range (graph has {num_nodes} nodes)")]
    NodeOutOfRange { id: usize, num_nodes: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("walk corpus is empty")]
    EmptyCorpus,

    #[error("numerical failure: {0}")]
    NonFinite(String),

    #[error("AUC is undefined: labels must contain both positive and negative examples")]
    SingleClass,

    #[error("no users to evaluate")]
    NoUsers,

    #[error("ranking for user {0} is not sorted by descending score")]
    UnsortedRanking(usize),

    #[error("requested {requested} negatives but only {available} non-edges are available")]
    NotEnoughNonEdges { requested: usize, available: usize },

    #[error("positive pair ({0}, {1}) is already an edge of the target type")]
    PositiveInPreGraph(String, String),

    #[error("bad artifact {what}: {message}")]
    Artifact { what: String, message: String },

    #[error("{stage}: missing input artifact {}", path.display())]
    MissingArtifact { stage: String, path: std::path::PathBuf },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn artifact(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Artifact { what: what.into(), message: message.into() }
    }
}
