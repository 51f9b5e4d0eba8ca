//! Finite-type cluster mutation patterns and cluster earthquake maps.
//!
//! Indices are 0-based throughout: direction `k` of a rank-`n` seed is one of
//! `0..n`.

pub mod earthquake;
pub mod error;
pub mod exchange;
pub mod fpoly;
pub mod grid;
pub mod horocycle;
pub mod matrix;
pub mod pattern;
pub mod points;
pub mod semifield;
pub mod verify;

pub use error::{Error, Result};
pub use exchange::{
    build_cartan_seed, mutate_matrix, relabel, DynkinType, ExchangeMatrix, Orientation,
    Permutation,
};
pub use fpoly::{f_matrix, mutate_f, FMatrix, FPolynomial};
pub use matrix::IntMatrix;
pub use pattern::{
    enumerate, enumerate_type, fan, opposite, Cone, EnumerateOptions, ExchangePattern,
    PatternVertex, VertexId,
};
