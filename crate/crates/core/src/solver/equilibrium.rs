//! Per-node equilibrium search.
//!
//! At a node `z`, a prescription `gamma` is consistent when every action in
//! the support of `gamma(.|x)` maximises the one-shot action value
//!
//! ```text
//! Q(x, a) = R(x, a, G(z, gamma)) + delta * sum_x' P(x' | x, a) V(phi(z, gamma), x')
//! ```
//!
//! for both types. A single player does not move `G` or `phi`, so `gamma`
//! enters `Q` only through the population terms.
//!
//! Candidates are tried in three stages: the four pure prescriptions (in the
//! order given by the [`SelectionRule`]), then one type mixing while the other
//! plays purely, then both types mixing.

use core::fmt;
use core::str::FromStr;

use crate::dynamics::{action_mean_field, propagate, Prescription, TypeMeanField};
use crate::error::SolveError;
use crate::model::{reward, transition_prob, Action, AgentType, ModelParams};
use crate::solver::tables::{NodeEquilibrium, ValueTable};

/// Default tie tolerance for best-response sets, in reward units.
pub const INDIFFERENCE_TOL: f64 = 1e-9;

/// Bracket width at which mixing-probability bisection stops.
pub const MIXING_TOL: f64 = 1e-10;

/// Subintervals scanned for sign changes before bisecting.
const ROOT_SCAN: usize = 32;

/// Which consistent pure prescription to report when several exist.
///
/// Every rule is mirror-symmetric about `z1 = 1/2` except `Lexicographic`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SelectionRule {
    /// Herd with the majority type (`z1 <= 1/2` herds on `-1`), then
    /// truthful, then herd with the minority, then contrarian.
    #[default]
    MajorityHerdFirst,
    /// Truthful, then majority herd, then minority herd, then contrarian.
    TruthfulFirst,
    /// `(0,0)`, `(0,1)`, `(1,0)`, `(1,1)` regardless of `z1`.
    Lexicographic,
}

impl SelectionRule {
    pub const ALL: [SelectionRule; 3] = [
        SelectionRule::MajorityHerdFirst,
        SelectionRule::TruthfulFirst,
        SelectionRule::Lexicographic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectionRule::MajorityHerdFirst => "majority-herd-first",
            SelectionRule::TruthfulFirst => "truthful-first",
            SelectionRule::Lexicographic => "lexicographic",
        }
    }

    /// Pure candidates in preference order at `z1`.
    pub fn pure_order(self, z1: f64) -> [Prescription; 4] {
        // the midpoint counts as a `-1` majority
        let (majority, minority) = if z1 > 0.5 {
            (Prescription::HERD_PLUS, Prescription::HERD_MINUS)
        } else {
            (Prescription::HERD_MINUS, Prescription::HERD_PLUS)
        };
        match self {
            SelectionRule::MajorityHerdFirst => [
                majority,
                Prescription::TRUTHFUL,
                minority,
                Prescription::CONTRARIAN,
            ],
            SelectionRule::TruthfulFirst => [
                Prescription::TRUTHFUL,
                majority,
                minority,
                Prescription::CONTRARIAN,
            ],
            SelectionRule::Lexicographic => [
                Prescription::HERD_MINUS,
                Prescription::TRUTHFUL,
                Prescription::CONTRARIAN,
                Prescription::HERD_PLUS,
            ],
        }
    }
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownSelectionRule;

impl fmt::Display for UnknownSelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected one of majority-herd-first, truthful-first, lexicographic")
    }
}

impl FromStr for SelectionRule {
    type Err = UnknownSelectionRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SelectionRule::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or(UnknownSelectionRule)
    }
}

/// Population terms shared by every player at `(z, gamma)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Continuation {
    mu1: f64,
    v_minus: f64,
    v_plus: f64,
}

impl Continuation {
    pub(crate) fn new(
        z: TypeMeanField,
        gamma: &Prescription,
        values: &ValueTable,
        params: &ModelParams,
    ) -> Self {
        let next = propagate(z, gamma, params).z1();
        Continuation {
            mu1: action_mean_field(z, gamma).mu1(),
            v_minus: values.interpolate_unchecked(next, AgentType::Minus),
            v_plus: values.interpolate_unchecked(next, AgentType::Plus),
        }
    }

    #[inline]
    pub(crate) fn action_value(&self, x: AgentType, a: Action, params: &ModelParams) -> f64 {
        let to_plus = transition_prob(AgentType::Plus, x, a, params);
        reward(x, a, self.mu1, params)
            + params.delta() * (to_plus * self.v_plus + (1.0 - to_plus) * self.v_minus)
    }

    /// `Q(x, +1) - Q(x, -1)`.
    #[inline]
    pub(crate) fn gap(&self, x: AgentType, params: &ModelParams) -> f64 {
        self.action_value(x, Action::Plus, params) - self.action_value(x, Action::Minus, params)
    }

    /// Expected action value when type `x` follows `gamma`.
    pub(crate) fn value_under(
        &self,
        x: AgentType,
        gamma: &Prescription,
        params: &ModelParams,
    ) -> f64 {
        let g = gamma.prob_plus(x);
        let mut v = 0.0;
        if g > 0.0 {
            v += g * self.action_value(x, Action::Plus, params);
        }
        if g < 1.0 {
            v += (1.0 - g) * self.action_value(x, Action::Minus, params);
        }
        v
    }
}

/// Value of playing `a` as type `x` when everyone else follows
/// `gamma_others`.
pub fn action_value(
    z: TypeMeanField,
    x: AgentType,
    a: Action,
    gamma_others: &Prescription,
    values: &ValueTable,
    params: &ModelParams,
) -> f64 {
    Continuation::new(z, gamma_others, values, params).action_value(x, a, params)
}

/// Optimal actions of one type; `Both` marks indifference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionSet {
    Only(Action),
    Both,
}

impl ActionSet {
    fn from_gap(gap: f64, tol: f64) -> Self {
        if gap > tol {
            ActionSet::Only(Action::Plus)
        } else if gap < -tol {
            ActionSet::Only(Action::Minus)
        } else {
            ActionSet::Both
        }
    }

    pub fn contains(self, a: Action) -> bool {
        match self {
            ActionSet::Both => true,
            ActionSet::Only(b) => a == b,
        }
    }

    pub fn len(self) -> usize {
        match self {
            ActionSet::Both => 2,
            ActionSet::Only(_) => 1,
        }
    }

    pub fn is_empty(self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BestResponse {
    pub minus: ActionSet,
    pub plus: ActionSet,
}

impl BestResponse {
    pub fn get(&self, x: AgentType) -> ActionSet {
        match x {
            AgentType::Minus => self.minus,
            AgentType::Plus => self.plus,
        }
    }
}

/// Best actions per type against `gamma_others`, ties within `indifference_tol`.
pub fn best_response_set(
    z: TypeMeanField,
    gamma_others: &Prescription,
    values: &ValueTable,
    params: &ModelParams,
    indifference_tol: f64,
) -> BestResponse {
    let c = Continuation::new(z, gamma_others, values, params);
    BestResponse {
        minus: ActionSet::from_gap(c.gap(AgentType::Minus, params), indifference_tol),
        plus: ActionSet::from_gap(c.gap(AgentType::Plus, params), indifference_tol),
    }
}

/// Support condition for one type given its gap.
#[inline]
fn type_consistent(g: f64, gap: f64, tol: f64) -> bool {
    (g == 0.0 || gap >= -tol) && (g == 1.0 || gap <= tol)
}

pub(crate) struct NodeSearch<'a> {
    pub z: TypeMeanField,
    pub values: &'a ValueTable,
    pub params: &'a ModelParams,
    pub tol: f64,
}

impl NodeSearch<'_> {
    fn continuation(&self, gamma: &Prescription) -> Continuation {
        Continuation::new(self.z, gamma, self.values, self.params)
    }

    fn gap(&self, gamma: &Prescription, x: AgentType) -> f64 {
        self.continuation(gamma).gap(x, self.params)
    }

    pub(crate) fn is_consistent(&self, gamma: &Prescription) -> bool {
        let c = self.continuation(gamma);
        AgentType::ALL
            .iter()
            .all(|&x| type_consistent(gamma.prob_plus(x), c.gap(x, self.params), self.tol))
    }

    /// Type `mixer` randomises, the other type plays `other` (0 or 1).
    fn one_type_mixing(&self, mixer: AgentType, other: f64) -> Option<Prescription> {
        let base = Prescription::TRUTHFUL.with_prob_plus(mixer.flipped(), other);
        let gamma_at = |g: f64| base.with_prob_plus(mixer, g);
        let g = find_root(|g| self.gap(&gamma_at(g), mixer), self.tol)?;
        let gamma = gamma_at(g);
        let gap_other = self.gap(&gamma, mixer.flipped());
        type_consistent(other, gap_other, self.tol).then_some(gamma)
    }

    fn both_mixing(&self) -> Option<Prescription> {
        let inner = |gm: f64| {
            let at = |gp: f64| {
                Prescription::TRUTHFUL
                    .with_prob_plus(AgentType::Minus, gm)
                    .with_prob_plus(AgentType::Plus, gp)
            };
            find_root(|gp| self.gap(&at(gp), AgentType::Plus), self.tol).map(at)
        };
        let outer = |gm: f64| inner(gm).map(|gamma| self.gap(&gamma, AgentType::Minus));
        let gm = find_root_partial(outer, self.tol)?;
        inner(gm)
    }
}

/// First root of a continuous `f` on `[0, 1]`: scan for a sign change,
/// then bisect to [`MIXING_TOL`]. Scan points with `|f| <= zero_tol` count
/// as roots.
fn find_root(f: impl Fn(f64) -> f64, zero_tol: f64) -> Option<f64> {
    find_root_partial(|x| Some(f(x)), zero_tol)
}

/// As [`find_root`], for functions undefined at some points; brackets whose
/// interior hits an undefined point are abandoned.
fn find_root_partial(f: impl Fn(f64) -> Option<f64>, zero_tol: f64) -> Option<f64> {
    let at = |k: usize| k as f64 / ROOT_SCAN as f64;
    let mut prev = (0.0, f(0.0));
    if matches!(prev.1, Some(v) if v.abs() <= zero_tol) {
        return Some(0.0);
    }
    for k in 1..=ROOT_SCAN {
        let x = at(k);
        let cur = (x, f(x));
        if let Some(fb) = cur.1 {
            if fb.abs() <= zero_tol {
                return Some(x);
            }
            if let (a, Some(fa)) = prev {
                if fa * fb < 0.0 {
                    if let Some(root) = bisect(&f, a, fa, x) {
                        return Some(root);
                    }
                }
            }
        }
        prev = cur;
    }
    None
}

fn bisect(f: &impl Fn(f64) -> Option<f64>, mut a: f64, mut fa: f64, mut b: f64) -> Option<f64> {
    while b - a > MIXING_TOL {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Some(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Some(0.5 * (a + b))
}

/// `theta[z]` for the given continuation values.
///
/// Returns the first consistent pure prescription in `rule` order; the
/// multiplicity flag is set when more than one pure prescription is
/// consistent. Falls back to one-type mixing (types `-1` then `+1` as the
/// mixer, the other type playing `-1` then `+1`), then to both types mixing.
pub fn equilibrium_at(
    z: TypeMeanField,
    values: &ValueTable,
    params: &ModelParams,
    rule: SelectionRule,
    indifference_tol: f64,
) -> Result<NodeEquilibrium, SolveError> {
    let search = NodeSearch {
        z,
        values,
        params,
        tol: indifference_tol,
    };
    let mut chosen = None;
    let mut consistent = 0usize;
    for gamma in rule.pure_order(z.z1()) {
        if search.is_consistent(&gamma) {
            consistent += 1;
            chosen.get_or_insert(gamma);
        }
    }
    if let Some(prescription) = chosen {
        return Ok(NodeEquilibrium {
            prescription,
            multiplicity: consistent > 1,
            mixing: false,
        });
    }
    let mixed = [
        (AgentType::Minus, 0.0),
        (AgentType::Minus, 1.0),
        (AgentType::Plus, 0.0),
        (AgentType::Plus, 1.0),
    ]
    .into_iter()
    .find_map(|(mixer, other)| search.one_type_mixing(mixer, other))
    .or_else(|| search.both_mixing());
    match mixed {
        Some(prescription) => Ok(NodeEquilibrium {
            prescription,
            multiplicity: false,
            mixing: true,
        }),
        None => Err(SolveError::NoEquilibrium { z1: z.z1() }),
    }
}
