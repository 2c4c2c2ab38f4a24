//! Finite populations playing the mean-field equilibrium policy.
//!
//! Agents see the empirical type share `z_hat_t` and play `theta` at the
//! grid node nearest to it; no finite-N equilibrium is recomputed. One
//! ChaCha stream per run, seeded from `seed`, drives every draw in a fixed
//! agent order, so a run is reproducible from its seed alone.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::TypeMeanField;
use crate::model::{Action, AgentType, ModelParams};
use crate::solver::EquilibriumTable;

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalTrajectory {
    pub population: usize,
    pub seed: u64,
    /// Empirical type share on `+1`, `t = 0..=T`.
    pub z1_hat: Vec<f64>,
    /// Empirical action share on `+1`, `t = 0..=T`.
    pub mu1_hat: Vec<f64>,
}

impl EmpiricalTrajectory {
    /// `max_t |z_hat_t - z_t|` against a reference path.
    pub fn sup_deviation(&self, reference: impl IntoIterator<Item = f64>) -> f64 {
        self.z1_hat
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Simulates `population` agents for `horizon` periods.
///
/// The initial population has exactly `round(z0 * N)` agents of type `+1`.
/// Returns `None` when `population == 0`.
pub fn finite_n_simulate(
    population: usize,
    z0: TypeMeanField,
    theta: &EquilibriumTable,
    params: &ModelParams,
    horizon: usize,
    seed: u64,
) -> Option<EmpiricalTrajectory> {
    if population == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_plus = libm::round(z0.z1() * population as f64) as usize;
    let mut types: Vec<AgentType> = (0..population)
        .map(|i| {
            if i < n_plus {
                AgentType::Plus
            } else {
                AgentType::Minus
            }
        })
        .collect();
    let n = population as f64;
    let mut z1_hat = Vec::with_capacity(horizon + 1);
    let mut mu1_hat = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        let plus = types.iter().filter(|&&x| x == AgentType::Plus).count();
        let share = plus as f64 / n;
        z1_hat.push(share);
        let gamma = theta.lookup(share);
        let mut playing_plus = 0usize;
        for x in types.iter_mut() {
            let g = gamma.prob_plus(*x);
            let a = if g >= 1.0 || (g > 0.0 && rng.random::<f64>() < g) {
                Action::Plus
            } else {
                Action::Minus
            };
            if a == Action::Plus {
                playing_plus += 1;
            }
            if t < horizon && rng.random_bool(params.flip_prob(*x, a)) {
                *x = x.flipped();
            }
        }
        mu1_hat.push(playing_plus as f64 / n);
    }
    Some(EmpiricalTrajectory {
        population,
        seed,
        z1_hat,
        mu1_hat,
    })
}
