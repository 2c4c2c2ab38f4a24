//! Game primitives: private types, actions, parameters, the type-transition
//! kernel and the instantaneous reward.
//!
//! Types and actions both live in `{-1, +1}`. A player whose action matches
//! its type keeps that type with probability `1 - p1`; a mismatched action
//! raises the flip probability to `p2`. The kernel does not depend on the
//! population state.

use core::fmt;

use crate::error::ParamError;

/// A player's private preference. `Plus` prefers technology A (`+1`),
/// `Minus` prefers technology B (`-1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentType {
    Minus,
    Plus,
}

/// The technology chosen in a period.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Minus,
    Plus,
}

impl AgentType {
    pub const ALL: [AgentType; 2] = [AgentType::Minus, AgentType::Plus];

    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            AgentType::Minus => -1.0,
            AgentType::Plus => 1.0,
        }
    }

    #[inline]
    pub fn flipped(self) -> AgentType {
        match self {
            AgentType::Minus => AgentType::Plus,
            AgentType::Plus => AgentType::Minus,
        }
    }

    /// The action that agrees with this preference.
    #[inline]
    pub fn aligned_action(self) -> Action {
        match self {
            AgentType::Minus => Action::Minus,
            AgentType::Plus => Action::Plus,
        }
    }

    pub fn from_sign(value: i8) -> Option<AgentType> {
        match value {
            -1 => Some(AgentType::Minus),
            1 => Some(AgentType::Plus),
            _ => None,
        }
    }
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Minus, Action::Plus];

    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Action::Minus => -1.0,
            Action::Plus => 1.0,
        }
    }

    #[inline]
    pub fn flipped(self) -> Action {
        match self {
            Action::Minus => Action::Plus,
            Action::Plus => Action::Minus,
        }
    }

    pub fn from_sign(value: i8) -> Option<Action> {
        match value {
            -1 => Some(Action::Minus),
            1 => Some(Action::Plus),
            _ => None,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Action::Minus => -1,
            Action::Plus => 1,
        }
    }
}

impl fmt::Display for AgentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentType::Minus => f.write_str("-1"),
            AgentType::Plus => f.write_str("1"),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// Unvalidated parameter tuple, as read from a config or constructed by hand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawParams {
    pub p1: f64,
    pub p2: f64,
    pub alpha: f64,
    pub delta: f64,
}

/// Validated model parameters.
///
/// Invariants: `0 <= p1 < p2 < 1/2`, `0 <= alpha <= 1`, `0 <= delta < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    p1: f64,
    p2: f64,
    alpha: f64,
    delta: f64,
}

impl ModelParams {
    pub fn new(p1: f64, p2: f64, alpha: f64, delta: f64) -> Result<Self, ParamError> {
        validate_params(RawParams {
            p1,
            p2,
            alpha,
            delta,
        })
    }

    /// Flip probability when the action matches the type.
    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// Flip probability when the action differs from the type.
    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// Weight of personal preference in the reward.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Same model with a different preference weight.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self, ParamError> {
        Self::new(self.p1, self.p2, alpha, self.delta)
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            p1: self.p1,
            p2: self.p2,
            alpha: self.alpha,
            delta: self.delta,
        }
    }

    /// Upper bound on `|V|`: rewards are bounded by 1 in absolute value.
    pub fn value_bound(&self) -> f64 {
        1.0 / (1.0 - self.delta)
    }

    #[inline]
    pub(crate) fn flip_prob(&self, x: AgentType, a: Action) -> f64 {
        if x.aligned_action() == a {
            self.p1
        } else {
            self.p2
        }
    }
}

/// Checks the standing assumptions on the parameter tuple.
///
/// `p1 = 0` is allowed; only `p1 < p2` is strict.
pub fn validate_params(raw: RawParams) -> Result<ModelParams, ParamError> {
    let RawParams {
        p1,
        p2,
        alpha,
        delta,
    } = raw;
    for (name, v) in [("p1", p1), ("p2", p2), ("alpha", alpha), ("delta", delta)] {
        if !v.is_finite() {
            return Err(ParamError::NotFinite { name, value: v });
        }
    }
    if p1 < 0.0 {
        return Err(ParamError::NegativeP1 { p1 });
    }
    if p1 >= p2 {
        return Err(ParamError::P1NotBelowP2 { p1, p2 });
    }
    if p2 >= 0.5 {
        return Err(ParamError::P2NotBelowHalf { p2 });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ParamError::AlphaOutOfRange { alpha });
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(ParamError::DeltaOutOfRange { delta });
    }
    Ok(ModelParams {
        p1,
        p2,
        alpha,
        delta,
    })
}

/// `P(x_next | x, a)`.
#[inline]
pub fn transition_prob(x_next: AgentType, x: AgentType, a: Action, params: &ModelParams) -> f64 {
    let flip = params.flip_prob(x, a);
    if x_next == x {
        1.0 - flip
    } else {
        flip
    }
}

/// Instantaneous reward `alpha*x*a + (1-alpha)*a*(2*mu1 - 1)`.
#[inline]
pub fn reward(x: AgentType, a: Action, mu1: f64, params: &ModelParams) -> f64 {
    let alpha = params.alpha;
    alpha * x.sign() * a.sign() + (1.0 - alpha) * a.sign() * (2.0 * mu1 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> ModelParams {
        ModelParams::new(0.1, 0.3, 0.1, 0.9).unwrap()
    }

    #[test]
    fn accepts_reference_parameters() {
        let p = validate_params(RawParams {
            p1: 0.1,
            p2: 0.3,
            alpha: 0.1,
            delta: 0.9,
        })
        .unwrap();
        assert_eq!(p.p1(), 0.1);
        assert_eq!(p.delta(), 0.9);
    }

    #[test]
    fn rejects_each_violation_distinctly() {
        let bad = |p1, p2, alpha, delta| {
            validate_params(RawParams {
                p1,
                p2,
                alpha,
                delta,
            })
        };
        assert!(matches!(
            bad(0.3, 0.1, 0.5, 0.9),
            Err(ParamError::P1NotBelowP2 { .. })
        ));
        assert!(matches!(
            bad(0.1, 0.5, 0.5, 0.9),
            Err(ParamError::P2NotBelowHalf { .. })
        ));
        assert!(matches!(
            bad(0.1, 0.3, 1.5, 0.9),
            Err(ParamError::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            bad(0.1, 0.3, -0.1, 0.9),
            Err(ParamError::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            bad(0.1, 0.3, 0.5, 1.0),
            Err(ParamError::DeltaOutOfRange { .. })
        ));
        assert!(matches!(
            bad(0.1, 0.3, 0.5, -0.2),
            Err(ParamError::DeltaOutOfRange { .. })
        ));
        assert!(matches!(
            bad(-0.1, 0.3, 0.5, 0.9),
            Err(ParamError::NegativeP1 { .. })
        ));
        assert!(matches!(
            bad(f64::NAN, 0.3, 0.5, 0.9),
            Err(ParamError::NotFinite { name: "p1", .. })
        ));
        // equal flip probabilities are not allowed either
        assert!(matches!(
            bad(0.2, 0.2, 0.5, 0.9),
            Err(ParamError::P1NotBelowP2 { .. })
        ));
    }

    #[test]
    fn p1_zero_is_allowed() {
        assert!(ModelParams::new(0.0, 0.3, 0.5, 0.9).is_ok());
    }

    #[test]
    fn kernel_examples() {
        let p = baseline();
        assert_eq!(
            transition_prob(AgentType::Minus, AgentType::Plus, Action::Plus, &p),
            0.1
        );
        assert_eq!(
            transition_prob(AgentType::Minus, AgentType::Plus, Action::Minus, &p),
            0.3
        );
        assert_eq!(
            transition_prob(AgentType::Plus, AgentType::Minus, Action::Plus, &p),
            0.3
        );
        assert_eq!(
            transition_prob(AgentType::Minus, AgentType::Minus, Action::Minus, &p),
            0.9
        );
    }

    #[test]
    fn reward_examples() {
        let p = baseline();
        assert!((reward(AgentType::Minus, Action::Minus, 0.0, &p) - 1.0).abs() < 1e-15);
        assert!((reward(AgentType::Plus, Action::Minus, 0.0, &p) - 0.8).abs() < 1e-15);
        let p2 = p.with_alpha(0.2).unwrap();
        assert!((reward(AgentType::Plus, Action::Plus, 0.5, &p2) - 0.2).abs() < 1e-15);
        let p1 = p.with_alpha(1.0).unwrap();
        for x in AgentType::ALL {
            for a in Action::ALL {
                for mu in [0.0, 0.3, 1.0] {
                    assert_eq!(reward(x, a, mu, &p1), x.sign() * a.sign());
                }
            }
        }
    }

    #[test]
    fn signs_round_trip() {
        for a in Action::ALL {
            assert_eq!(Action::from_sign(a.as_i8()), Some(a));
        }
        assert_eq!(AgentType::from_sign(0), None);
        assert_eq!(AgentType::Plus.flipped(), AgentType::Minus);
    }
}
