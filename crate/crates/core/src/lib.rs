//! Finite expanded trees with well-ordered levels and labeled splitting,
//! their embedded sequences and similarity types, quantifier-free type
//! census, and brute-force checking of tree partition relations.

pub mod census;
pub mod error;
pub mod eseq;
pub mod experiment;
pub mod partition;
pub mod simtype;
pub mod tree;

pub use error::{Error, Result};
pub use eseq::ESeq;
pub use simtype::SimilarityType;
pub use tree::{ExpandedTree, LevelOrder, Node};
