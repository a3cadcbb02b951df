//! Optimal transport and assignment solvers.

mod lsap;
mod sinkhorn;

use thiserror::Error;

pub use lsap::lsap_min;
pub use sinkhorn::{extended_sinkhorn, sinkhorn, OtResult, SinkhornConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OtError {
    #[error("cost is {rows}x{cols} but mu has {mu} and nu has {nu} entries")]
    Shape {
        rows: usize,
        cols: usize,
        mu: usize,
        nu: usize,
    },
    #[error("masses differ: sum(mu) = {0}, sum(nu) = {1}")]
    MassMismatch(f64, f64),
    #[error("mass entries must be finite and nonnegative")]
    NegativeMass,
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("cost matrix has non-finite entries")]
    NonFiniteCost,
    #[error("kernel underflow at epsilon = {epsilon}; retry with a larger epsilon or the log-domain solver")]
    Unstable { epsilon: f64 },
    #[error("{rows} rows cannot be matched into {cols} columns")]
    TooManyRows { rows: usize, cols: usize },
    #[error("constraint ({0}, {1}) is out of range")]
    ConstraintOutOfRange(usize, usize),
    #[error("forced pair ({0}, {1}) reuses a row or column")]
    OverlappingForced(usize, usize),
    #[error("no assignment satisfies the forced and forbidden pairs")]
    Infeasible,
}
