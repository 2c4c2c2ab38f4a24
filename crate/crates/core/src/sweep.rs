//! Herding phase diagram over the preference weight `alpha`.
//!
//! Each `alpha` is solved independently, then the flow is run from every
//! initial-state probe. A probe herds when the prescription is
//! type-independent from some step to the horizon and the limit point has
//! converged.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::dynamics::TypeMeanField;
use crate::error::{Error as CoreError, SolveError};
use crate::model::{Action, ModelParams, RawParams};
use crate::solver::{solve_mfe, Grid, SolveOptions, SolveReport};
use crate::trajectory::{detect_herding, simulate};

pub const DEFAULT_PROBES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];
pub const DEFAULT_HORIZON: usize = 500;
/// Tolerance for type-independence and limit convergence of a probe path.
pub const HERDING_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    HerdAlways,
    HerdNever,
    InitialConditionDependent,
    /// The solve failed; diagnostics are on the phase point.
    Unclassified,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::HerdAlways => "herd-always",
            Classification::HerdNever => "herd-never",
            Classification::InitialConditionDependent => "initial-condition-dependent",
            Classification::Unclassified => "unclassified",
        }
    }

    /// Position along the expected `alpha` ordering; `None` for unclassified.
    fn rank(self) -> Option<u8> {
        match self {
            Classification::HerdAlways => Some(0),
            Classification::InitialConditionDependent => Some(1),
            Classification::HerdNever => Some(2),
            Classification::Unclassified => None,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Classification {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Classification::HerdAlways,
            Classification::HerdNever,
            Classification::InitialConditionDependent,
            Classification::Unclassified,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or(UnknownName)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("unrecognised name")]
pub struct UnknownName;

/// Predicates usable for threshold bisection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PhasePredicate {
    HerdAlways,
    HerdNever,
    Dependent,
}

impl PhasePredicate {
    pub fn holds(self, c: Classification) -> bool {
        matches!(
            (self, c),
            (PhasePredicate::HerdAlways, Classification::HerdAlways)
                | (PhasePredicate::HerdNever, Classification::HerdNever)
                | (
                    PhasePredicate::Dependent,
                    Classification::InitialConditionDependent
                )
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PhasePredicate::HerdAlways => "herd-always",
            PhasePredicate::HerdNever => "herd-never",
            PhasePredicate::Dependent => "initial-condition-dependent",
        }
    }
}

impl fmt::Display for PhasePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhasePredicate {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            PhasePredicate::HerdAlways,
            PhasePredicate::HerdNever,
            PhasePredicate::Dependent,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or(UnknownName)
    }
}

/// Model parameters other than `alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaseParams {
    pub p1: f64,
    pub p2: f64,
    pub delta: f64,
}

impl BaseParams {
    pub fn with_alpha(&self, alpha: f64) -> Result<ModelParams, CoreError> {
        Ok(crate::model::validate_params(RawParams {
            p1: self.p1,
            p2: self.p2,
            alpha,
            delta: self.delta,
        })?)
    }
}

impl Default for BaseParams {
    fn default() -> Self {
        BaseParams {
            p1: 0.1,
            p2: 0.3,
            delta: 0.9,
        }
    }
}

/// Everything a phase point needs besides `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSetup {
    pub base: BaseParams,
    pub probes: Vec<TypeMeanField>,
    pub grid: Grid,
    pub horizon: usize,
    pub solve: SolveOptions,
}

impl SweepSetup {
    pub fn new(base: BaseParams, grid: Grid) -> Self {
        SweepSetup {
            base,
            probes: DEFAULT_PROBES
                .iter()
                .map(|&z| TypeMeanField::new(z).unwrap())
                .collect(),
            grid,
            horizon: DEFAULT_HORIZON,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeOutcome {
    pub z0: f64,
    pub herded: bool,
    pub herd_action: Option<Action>,
    pub limit_z1: f64,
    pub limit_mu1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub alpha: f64,
    pub classification: Classification,
    pub outcomes: Vec<ProbeOutcome>,
    /// Solver diagnostics, present whenever a solve ran to completion or
    /// hit the iteration cap.
    pub report: Option<SolveReport>,
    /// Why the point is unclassified, if it is.
    pub failure: Option<String>,
}

fn classify_outcomes(outcomes: &[ProbeOutcome]) -> Classification {
    let herded = outcomes.iter().filter(|o| o.herded).count();
    if outcomes.is_empty() {
        Classification::Unclassified
    } else if herded == outcomes.len() {
        Classification::HerdAlways
    } else if herded == 0 {
        Classification::HerdNever
    } else {
        Classification::InitialConditionDependent
    }
}

/// Solves at `alpha` and classifies the herding behaviour across probes.
pub fn classify_alpha(alpha: f64, setup: &SweepSetup) -> PhasePoint {
    use alloc::string::ToString;

    let unclassified = |failure: String, report| PhasePoint {
        alpha,
        classification: Classification::Unclassified,
        outcomes: Vec::new(),
        report,
        failure: Some(failure),
    };
    let params = match setup.base.with_alpha(alpha) {
        Ok(p) => p,
        Err(e) => return unclassified(e.to_string(), None),
    };
    let solution = match solve_mfe(&params, setup.grid, &setup.solve) {
        Ok(s) => s,
        Err(e @ SolveError::NotConverged(_)) => {
            let report = match &e {
                SolveError::NotConverged(s) => Some(s.report),
                _ => None,
            };
            return unclassified(e.to_string(), report);
        }
        Err(e) => return unclassified(e.to_string(), None),
    };
    let outcomes: Vec<ProbeOutcome> = setup
        .probes
        .iter()
        .map(|&z0| {
            let traj = simulate(z0, &solution.theta, &params, setup.horizon);
            let rep = detect_herding(&traj, HERDING_TOL);
            let herded = rep.herded && rep.limit.converged;
            ProbeOutcome {
                z0: z0.z1(),
                herded,
                herd_action: if herded { rep.herd_action } else { None },
                limit_z1: rep.limit.z1,
                limit_mu1: rep.limit.mu1,
            }
        })
        .collect();
    PhasePoint {
        alpha,
        classification: classify_outcomes(&outcomes),
        outcomes,
        report: Some(solution.report),
        failure: None,
    }
}

/// One phase point per `alpha`, in input order. Failures stay local to
/// their point.
pub fn alpha_sweep(alphas: &[f64], setup: &SweepSetup) -> Vec<PhasePoint> {
    alphas.iter().map(|&a| classify_alpha(a, setup)).collect()
}

/// `alpha` grid `start, start + step, ...` up to `stop` inclusive (with a
/// small allowance for rounding).
pub fn alpha_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if step.is_nan() || step <= 0.0 || stop < start {
        return Vec::new();
    }
    let count = libm::floor((stop - start) / step + 1e-9) as usize;
    (0..=count).map(|k| start + step * k as f64).collect()
}

/// Index pairs `(i, i + 1)` where the classification moves backwards along
/// herd-always -> dependent -> herd-never as `alpha` grows.
pub fn monotonic_anomalies(points: &[PhasePoint]) -> Vec<(usize, usize)> {
    let ranked: Vec<(usize, u8)> = points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.classification.rank().map(|r| (i, r)))
        .collect();
    ranked
        .windows(2)
        .filter(|w| w[1].1 < w[0].1)
        .map(|w| (w[0].0, w[1].0))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdResult {
    pub predicate: PhasePredicate,
    pub alpha_star: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    /// Predicate value at `bracket_lo` (the opposite holds at `bracket_hi`).
    pub holds_at_lo: bool,
}

impl ThresholdResult {
    pub fn width(&self) -> f64 {
        self.bracket_hi - self.bracket_lo
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThresholdError {
    #[error("invalid bracket [{lo}, {hi}] with tolerance {tol}")]
    InvalidBracket { lo: f64, hi: f64, tol: f64 },
    #[error("predicate {predicate} has the same value at alpha = {lo} and alpha = {hi}")]
    NoSignChange {
        predicate: PhasePredicate,
        lo: f64,
        hi: f64,
    },
    #[error("alpha = {alpha} could not be classified")]
    Unclassified { alpha: f64 },
}

/// Bisection on `alpha` for a change of `predicate`, assuming a single
/// crossing in `[lo, hi]`.
pub fn find_threshold(
    predicate: PhasePredicate,
    lo: f64,
    hi: f64,
    tol: f64,
    setup: &SweepSetup,
) -> Result<ThresholdResult, ThresholdError> {
    bisect_threshold(predicate, lo, hi, tol, |a| {
        classify_alpha(a, setup).classification
    })
}

/// [`find_threshold`] over an arbitrary classifier.
pub fn bisect_threshold(
    predicate: PhasePredicate,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut classify: impl FnMut(f64) -> Classification,
) -> Result<ThresholdResult, ThresholdError> {
    if tol.is_nan() || tol <= 0.0 || !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(ThresholdError::InvalidBracket { lo, hi, tol });
    }
    let mut eval = |alpha: f64| match classify(alpha) {
        Classification::Unclassified => Err(ThresholdError::Unclassified { alpha }),
        c => Ok(predicate.holds(c)),
    };
    let at_lo = eval(lo)?;
    let at_hi = eval(hi)?;
    if at_lo == at_hi {
        return Err(ThresholdError::NoSignChange { predicate, lo, hi });
    }
    // slack so that `hi - tol` is accepted as a finished bracket
    let width_limit = tol * (1.0 + 1e-9);
    while hi - lo > width_limit {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult {
        predicate,
        alpha_star: 0.5 * (lo + hi),
        bracket_lo: lo,
        bracket_hi: hi,
        holds_at_lo: at_lo,
    })
}
