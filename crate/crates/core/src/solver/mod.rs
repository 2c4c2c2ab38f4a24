//! Stationary mean field equilibrium by value iteration.
//!
//! Each sweep recomputes `theta[z]` at every node against the current value
//! table, then sets `V(z, x)` to the action value of `theta[z](.|x)`. Nodes
//! within a sweep only read the previous table.

mod equilibrium;
mod tables;
mod verify;

pub use equilibrium::{
    action_value, best_response_set, equilibrium_at, ActionSet, BestResponse, SelectionRule,
    UnknownSelectionRule, INDIFFERENCE_TOL, MIXING_TOL,
};
pub use tables::{interpolate_value, EquilibriumTable, Grid, NodeEquilibrium, ValueTable};
pub use verify::{verify_equilibrium, VerificationReport, Violation};

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::dynamics::TypeMeanField;
use crate::error::{Error, SolveError};
use crate::model::{AgentType, ModelParams};
use equilibrium::Continuation;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Stop when the sup-norm change between sweeps drops below this.
    pub tol: f64,
    pub max_iter: usize,
    pub selection: SelectionRule,
    pub indifference_tol: f64,
}

impl SolveOptions {
    pub const DEFAULT_TOL: f64 = 1e-9;
    pub const DEFAULT_MAX_ITER: usize = 10_000;

    fn check(&self) -> Result<(), Error> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidOption {
                name: "tol",
                reason: "must be positive",
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidOption {
                name: "max_iter",
                reason: "must be at least 1",
            });
        }
        if self.indifference_tol.is_nan() || self.indifference_tol < 0.0 {
            return Err(Error::InvalidOption {
                name: "indifference_tol",
                reason: "must be non-negative",
            });
        }
        Ok(())
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            selection: SelectionRule::default(),
            indifference_tol: INDIFFERENCE_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_sup_change: f64,
    /// `max |V - T(V)|` for the returned table.
    pub bellman_residual: f64,
    pub nodes_with_multiplicity: usize,
    pub nodes_with_mixing: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub params: ModelParams,
    pub selection: SelectionRule,
    pub theta: EquilibriumTable,
    pub values: ValueTable,
    pub report: SolveReport,
}

impl Solution {
    pub fn grid(&self) -> Grid {
        self.theta.grid()
    }
}

/// One dynamic-programming sweep: the equilibrium at every node against
/// `values`, and the values that equilibrium induces.
pub fn bellman_update(
    values: &ValueTable,
    params: &ModelParams,
    selection: SelectionRule,
    indifference_tol: f64,
) -> Result<(EquilibriumTable, ValueTable), SolveError> {
    let grid = values.grid();
    let n = grid.n_points();
    let mut nodes = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(n);
    for i in 0..n {
        let z = TypeMeanField::new(grid.node(i))?;
        let node = equilibrium_at(z, values, params, selection, indifference_tol)?;
        let c = Continuation::new(z, &node.prescription, values, params);
        minus.push(c.value_under(AgentType::Minus, &node.prescription, params));
        plus.push(c.value_under(AgentType::Plus, &node.prescription, params));
        nodes.push(node);
    }
    Ok((
        EquilibriumTable::new(grid, nodes)?,
        ValueTable::new(grid, minus, plus)?,
    ))
}

/// Solves for `(theta, V)` on `grid`, starting from `V = 0`.
///
/// The returned `theta` is the equilibrium against the returned `V`, so the
/// pair passes [`verify_equilibrium`] by construction. Running out of
/// iterations yields [`SolveError::NotConverged`] carrying the last iterate.
pub fn solve_mfe(
    params: &ModelParams,
    grid: Grid,
    options: &SolveOptions,
) -> Result<Solution, SolveError> {
    options.check()?;
    let mut values = ValueTable::zeros(grid);
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < options.max_iter {
        let (_, next) =
            bellman_update(&values, params, options.selection, options.indifference_tol)?;
        change = next.sup_distance(&values);
        values = next;
        iterations += 1;
        if change < options.tol {
            break;
        }
    }
    let (theta, image) =
        bellman_update(&values, params, options.selection, options.indifference_tol)?;
    let report = SolveReport {
        iterations,
        final_sup_change: change,
        bellman_residual: image.sup_distance(&values),
        nodes_with_multiplicity: theta.count_multiplicity(),
        nodes_with_mixing: theta.count_mixing(),
        converged: change < options.tol,
    };
    let solution = Solution {
        params: *params,
        selection: options.selection,
        theta,
        values,
        report,
    };
    if report.converged {
        Ok(solution)
    } else {
        Err(SolveError::NotConverged(Box::new(solution)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Prescription;
    use crate::model::{reward, Action};

    fn params(alpha: f64, delta: f64) -> ModelParams {
        ModelParams::new(0.1, 0.3, alpha, delta).unwrap()
    }

    #[test]
    fn myopic_game_converges_in_two_sweeps() {
        for alpha in [0.0, 0.1, 0.5, 1.0] {
            let p = params(alpha, 0.0);
            let sol = solve_mfe(&p, Grid::new(51).unwrap(), &SolveOptions::default()).unwrap();
            assert!(
                sol.report.iterations <= 2,
                "alpha {alpha}: {:?}",
                sol.report
            );
            for (i, z1) in sol.grid().nodes().enumerate() {
                let g = sol.theta.prescription(i);
                let mu =
                    crate::dynamics::action_mean_field(TypeMeanField::new(z1).unwrap(), &g).mu1();
                for x in AgentType::ALL {
                    let best = Action::ALL
                        .iter()
                        .map(|&a| reward(x, a, mu, &p))
                        .fold(f64::NEG_INFINITY, f64::max);
                    assert!((sol.values.get(i, x) - best).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn non_convergence_is_an_error_with_the_iterate() {
        let p = params(0.1, 0.9);
        let opts = SolveOptions {
            max_iter: 5,
            ..SolveOptions::default()
        };
        match solve_mfe(&p, Grid::new(21).unwrap(), &opts) {
            Err(SolveError::NotConverged(sol)) => {
                assert_eq!(sol.report.iterations, 5);
                assert!(!sol.report.converged);
                assert!(sol.report.final_sup_change > opts.tol);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_options() {
        let p = params(0.1, 0.9);
        let g = Grid::new(3).unwrap();
        for opts in [
            SolveOptions {
                tol: 0.0,
                ..Default::default()
            },
            SolveOptions {
                max_iter: 0,
                ..Default::default()
            },
            SolveOptions {
                indifference_tol: -1.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                solve_mfe(&p, g, &opts),
                Err(SolveError::Invalid(_))
            ));
        }
    }

    #[test]
    fn herding_solution_is_constant_per_side() {
        let p = params(0.1, 0.9);
        let sol = solve_mfe(&p, Grid::new(101).unwrap(), &SolveOptions::default()).unwrap();
        for i in 0..=50 {
            assert_eq!(sol.theta.prescription(i), Prescription::HERD_MINUS);
        }
        for i in 51..=100 {
            assert_eq!(sol.theta.prescription(i), Prescription::HERD_PLUS);
        }
        assert!(sol.values.sup_norm() <= p.value_bound());
    }
}
