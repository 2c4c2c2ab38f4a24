use crate::dynamics::TypeMeanField;
use crate::error::Error;
use crate::model::{Action, AgentType, ModelParams};
use crate::solver::equilibrium::Continuation;
use crate::solver::tables::{EquilibriumTable, ValueTable};

/// Where the largest best-response violation occurred.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub node: usize,
    pub z1: f64,
    pub agent_type: AgentType,
    /// Action in the support of `theta[z](.|x)` that falls short.
    pub action: Action,
    pub amount: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerificationReport {
    pub eps: f64,
    /// Largest shortfall of a supported action below the best action value.
    pub worst_violation: f64,
    pub worst: Option<Violation>,
    pub passed: bool,
}

/// Checks the argmax condition at every node: each action played with
/// positive probability under `theta[z]` is within `eps` of the best action
/// value against `theta[z]` itself.
pub fn verify_equilibrium(
    theta: &EquilibriumTable,
    values: &ValueTable,
    params: &ModelParams,
    eps: f64,
) -> Result<VerificationReport, Error> {
    let grid = theta.grid();
    if values.grid() != grid {
        return Err(Error::GridMismatch {
            expected: grid.n_points(),
            found: values.grid().n_points(),
        });
    }
    let mut worst: Option<Violation> = None;
    for i in 0..grid.n_points() {
        let z1 = grid.node(i);
        let gamma = theta.prescription(i);
        let c = Continuation::new(TypeMeanField::new(z1)?, &gamma, values, params);
        for x in AgentType::ALL {
            let q_minus = c.action_value(x, Action::Minus, params);
            let q_plus = c.action_value(x, Action::Plus, params);
            let best = q_minus.max(q_plus);
            for (a, q) in [(Action::Minus, q_minus), (Action::Plus, q_plus)] {
                if gamma.prob(a, x) <= 0.0 {
                    continue;
                }
                let amount = best - q;
                if worst.is_none_or(|w| amount > w.amount) {
                    worst = Some(Violation {
                        node: i,
                        z1,
                        agent_type: x,
                        action: a,
                        amount,
                    });
                }
            }
        }
    }
    let worst_violation = worst.map_or(0.0, |w| w.amount);
    Ok(VerificationReport {
        eps,
        worst_violation,
        worst,
        passed: worst_violation <= eps,
    })
}
