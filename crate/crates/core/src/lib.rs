//! Stationary mean field equilibria of a two-type social herding game.
//!
//! A continuum of players each privately hold a preference `x in {-1, +1}`
//! that drifts as a Markov chain depending on whether the chosen technology
//! matched it. Rewards mix own preference (weight `alpha`) with a network
//! term proportional to the share choosing the same technology. This crate
//! computes the equilibrium-generating function `theta[z]` and reward-to-go
//! `V(z, x)` on a grid over the type share `z1`, runs the mean-field flow
//! under equilibrium play, detects herding and maps the herding phases over
//! `alpha`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod dynamics;
pub mod error;
pub mod model;
pub mod population;
pub mod solver;
pub mod sweep;
pub mod trajectory;

pub use dynamics::{
    action_mean_field, propagate, stationary_mean_field, ActionMeanField, Prescription,
    TypeMeanField,
};
pub use error::{Error, ParamError, SolveError};
pub use model::{
    reward, transition_prob, validate_params, Action, AgentType, ModelParams, RawParams,
};
pub use solver::{
    solve_mfe, verify_equilibrium, EquilibriumTable, Grid, SelectionRule, Solution, SolveOptions,
    SolveReport, ValueTable,
};
