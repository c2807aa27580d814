use thiserror::Error;

use crate::tree::Node;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("node {node} is out of range (tree has {node_count} nodes)")]
    InvalidNode { node: Node, node_count: usize },

    #[error("level order for level {level} is not a permutation: {reason}")]
    InvalidPermutation { level: usize, reason: String },

    #[error("invalid tree parameters: {0}")]
    InvalidParameters(String),

    #[error("tree is not well formed: {0}")]
    MalformedTree(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("node map is not injective: nodes {first} and {second} share image {image}")]
    NotInjective { first: Node, second: Node, image: Node },

    #[error("sequence {nodes:?} is not an embedded sequence")]
    NotEseq { nodes: Vec<Node> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("missing lower value m*({n},{k})")]
    MissingValue { n: usize, k: usize },

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("chain link {link} does not compose: {reason}")]
    ChainMismatch { link: usize, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
