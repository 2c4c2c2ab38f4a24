//! Deterministic mean-field flow under equilibrium play, herding detection
//! and limit points.

use alloc::vec::Vec;

use crate::dynamics::{action_mean_field, propagate, ActionMeanField, Prescription, TypeMeanField};
use crate::model::{Action, ModelParams};
use crate::solver::EquilibriumTable;

/// Tail length inspected by [`limit_point`].
pub const LIMIT_WINDOW: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: usize,
    pub z: TypeMeanField,
    pub gamma: Prescription,
    pub mu: ActionMeanField,
}

/// Records for `t = 0..=T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn z1(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.z.z1())
    }

    pub fn mu1(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.mu.mu1())
    }
}

/// Runs the flow for `horizon` steps, looking up `gamma_t` at the node
/// nearest to `z_t`.
pub fn simulate(
    z0: TypeMeanField,
    theta: &EquilibriumTable,
    params: &ModelParams,
    horizon: usize,
) -> Trajectory {
    simulate_with(z0, params, horizon, |z| theta.lookup(z.z1()))
}

/// As [`simulate`] with an arbitrary feedback prescription.
pub fn simulate_with(
    z0: TypeMeanField,
    params: &ModelParams,
    horizon: usize,
    mut policy: impl FnMut(TypeMeanField) -> Prescription,
) -> Trajectory {
    let mut points = Vec::with_capacity(horizon + 1);
    let mut z = z0;
    for t in 0..=horizon {
        let gamma = policy(z);
        let mu = action_mean_field(z, &gamma);
        points.push(TrajectoryPoint { t, z, gamma, mu });
        z = propagate(z, &gamma, params);
    }
    Trajectory { points }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitPoint {
    pub z1: f64,
    pub mu1: f64,
    /// Largest spread of `z1` or `mu1` over the inspected tail.
    pub residual: f64,
    pub converged: bool,
}

/// Tail averages over the last [`LIMIT_WINDOW`] records (fewer if the
/// trajectory is shorter); converged when both spreads are within `tol`.
pub fn limit_point(traj: &Trajectory, tol: f64) -> LimitPoint {
    let k = traj.len().clamp(1, LIMIT_WINDOW);
    let tail = &traj.points[traj.len().saturating_sub(k)..];
    let spread = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        hi - lo
    };
    let n = tail.len() as f64;
    let z1 = tail.iter().map(|p| p.z.z1()).sum::<f64>() / n;
    let mu1 = tail.iter().map(|p| p.mu.mu1()).sum::<f64>() / n;
    let residual = spread(&mut tail.iter().map(|p| p.z.z1()))
        .max(spread(&mut tail.iter().map(|p| p.mu.mu1())));
    LimitPoint {
        z1,
        mu1,
        residual,
        converged: residual <= tol,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HerdingReport {
    pub herded: bool,
    /// First `t` from which the prescription stays type-independent.
    pub onset: Option<usize>,
    /// Common action when the herd prescription is pure.
    pub herd_action: Option<Action>,
    pub limit: LimitPoint,
}

/// Herding: from some `t*` on, `|g_minus - g_plus| <= tol` at every record.
///
/// Since only a finite horizon is available, callers wanting "forever"
/// should also require `limit.converged`.
pub fn detect_herding(traj: &Trajectory, tol: f64) -> HerdingReport {
    let limit = limit_point(traj, tol);
    let onset = traj
        .points
        .iter()
        .rposition(|p| !p.gamma.is_type_independent(tol))
        .map_or(Some(0), |last| (last + 1 < traj.len()).then_some(last + 1))
        .filter(|_| !traj.is_empty());
    let herd_action = onset.and_then(|_| {
        let g = traj.points.last()?.gamma;
        let common = 0.5 * (g.g_minus() + g.g_plus());
        if common <= tol {
            Some(Action::Minus)
        } else if common >= 1.0 - tol {
            Some(Action::Plus)
        } else {
            None
        }
    });
    HerdingReport {
        herded: onset.is_some(),
        onset,
        herd_action,
        limit,
    }
}
