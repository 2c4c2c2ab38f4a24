use alloc::boxed::Box;

use thiserror::Error;

use crate::solver::Solution;

/// Violations of the model's standing assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("p1 must be non-negative, got {p1}")]
    NegativeP1 { p1: f64 },
    #[error("p1 must be strictly below p2 (p1 = {p1}, p2 = {p2})")]
    P1NotBelowP2 { p1: f64, p2: f64 },
    #[error("p2 must be strictly below 1/2, got {p2}")]
    P2NotBelowHalf { p2: f64 },
    #[error("alpha must lie in [0, 1], got {alpha}")]
    AlphaOutOfRange { alpha: f64 },
    #[error("delta must lie in [0, 1), got {delta}")]
    DeltaOutOfRange { delta: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("{what} must lie in [0, 1], got {value}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),
    #[error("table has {found} nodes but the grid has {expected}")]
    GridMismatch { expected: usize, found: usize },
    #[error("invalid option {name}: {reason}")]
    InvalidOption {
        name: &'static str,
        reason: &'static str,
    },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(
        "value iteration stopped after {} iterations without converging (last sup change {:e})",
        .0.report.iterations,
        .0.report.final_sup_change
    )]
    NotConverged(Box<Solution>),
    #[error("no equilibrium prescription found at z1 = {z1}")]
    NoEquilibrium { z1: f64 },
    #[error(transparent)]
    Invalid(#[from] Error),
}
