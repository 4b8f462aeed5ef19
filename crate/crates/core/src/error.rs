use thiserror::Error;

use crate::graph::CutsetError;

/// Errors raised by the library. Node indices are 0-based in the API;
/// messages print them as 1-based labels (`node #k`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("node #{} is out of range (network has {n} nodes)", .node + 1)]
    NodeOutOfRange { node: usize, n: usize },

    #[error("duplicate edge (#{}, #{})", .0 + 1, .1 + 1)]
    DuplicateEdge(usize, usize),

    #[error("edge (#{}, #{}) has zero weight", .0 + 1, .1 + 1)]
    ZeroWeight(usize, usize),

    #[error("node #{} listed twice", .0 + 1)]
    DuplicateNode(usize),

    #[error("empty node set: {0}")]
    EmptySet(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric positive semidefinite: {0}")]
    NotPsd(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("covariance is singular (numerical rank {rank} of {dim})")]
    SingularCovariance { rank: usize, dim: usize },

    #[error("network is not stable: spectral radius {0}")]
    Unstable(f64),

    #[error("resolvent is singular at z = {re} + {im}i")]
    SingularResolvent { re: f64, im: f64 },

    #[error("G_pp has an eigenvalue on the unit circle (|lambda| = {0})")]
    UnitCircleEigenvalue(f64),

    #[error("not a mean-shift model: {0}")]
    NotMeanShift(String),

    #[error("not a covariance-shift model: {0}")]
    NotCovShift(String),

    #[error("criterion not applicable: {0}")]
    Inapplicable(String),

    #[error("near-singular system: {0}")]
    NearSingular(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Cutset(#[from] CutsetError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
