use std::fmt;

use crate::pattern::{ExchangePattern, VertexId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(thiserror::Error)]
pub enum Error {
    #[error("invalid Dynkin type: {0}")]
    InvalidType(String),

    #[error("matrix is not skew-symmetrizable: {0}")]
    NotSkewSymmetrizable(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("permutation does not preserve the symmetrizer")]
    SymmetrizerMismatch,

    #[error("not a permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("internal consistency violated: {0}")]
    Internal(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("vertex budget of {cap} exceeded; mutation class is probably not of finite type")]
    CapExceeded {
        cap: usize,
        partial: Box<ExchangePattern>,
    },

    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("point lies in no cone of the fan (completeness violated)")]
    NoConeFound,

    #[error("no chart certifies the point as an earthquake image")]
    NoAdmissibleVertex,

    #[error("tropical point lies on a fan wall (coordinate {index} of chart {chart} is {value})")]
    OnBoundary {
        chart: VertexId,
        index: usize,
        value: f64,
    },

    #[error("gluing needs a real nonzero coordinate, got {0}")]
    GluingDomain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("plots are only defined in rank 2, got rank {0}")]
    UnsupportedPlot(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

// The partial pattern carried by `CapExceeded` can be huge; keep Debug short.
impl fmt::Debug for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::CapExceeded { cap, partial } => f
                .debug_struct("CapExceeded")
                .field("cap", cap)
                .field("partial_vertices", &partial.len())
                .finish(),
            other => write!(f, "{other}"),
        }
    }
}
