//! Colorings, embeddings and partition-relation checks.

pub mod check;
pub mod coloring;
pub mod embedding;

pub use check::{
    check_arrow, check_arrow_all_colorings, check_arrow_prime, check_end_k, check_end_k_m, check_square_bracket,
    compose_homogeneous_chain, weak_similar, ChainLink, ChainVerdict, CheckResult, Requirement, SweepVerdict,
};
pub use coloring::{Arity, Colorer, Coloring, ColoringKind, Domain};
pub use embedding::{count_embeddings, find_embedding, for_each_embedding, Constraints, Embedding, SearchStats};
