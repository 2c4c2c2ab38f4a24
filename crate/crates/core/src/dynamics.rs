//! Forward equations: the action mean field `G(z, gamma)`, the discrete-time
//! Fokker-Planck step `phi(z, gamma)`, and stationary points of that step.
//!
//! Both mean fields have binary support, so each is stored as its mass on
//! `+1`; the mass on `-1` is the complement.

use crate::error::Error;
use crate::model::{transition_prob, Action, AgentType, ModelParams};

/// Population share of type `+1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct TypeMeanField(f64);

/// Population share playing action `+1` in the current period.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ActionMeanField(f64);

fn check_unit(what: &'static str, value: f64) -> Result<f64, Error> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange { what, value })
    }
}

impl TypeMeanField {
    pub fn new(z1: f64) -> Result<Self, Error> {
        check_unit("type mean field z1", z1).map(TypeMeanField)
    }

    /// Clamps into `[0, 1]`; used on outputs that can leave the interval by
    /// rounding only.
    pub(crate) fn clamped(z1: f64) -> Self {
        TypeMeanField(z1.clamp(0.0, 1.0))
    }

    #[inline]
    pub fn z1(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn mass(self, x: AgentType) -> f64 {
        match x {
            AgentType::Plus => self.0,
            AgentType::Minus => 1.0 - self.0,
        }
    }

    pub fn flipped(self) -> Self {
        TypeMeanField(1.0 - self.0)
    }
}

impl ActionMeanField {
    pub fn new(mu1: f64) -> Result<Self, Error> {
        check_unit("action mean field mu1", mu1).map(ActionMeanField)
    }

    #[inline]
    pub fn mu1(self) -> f64 {
        self.0
    }
}

/// Probability of playing `+1` for each private type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prescription {
    g_minus: f64,
    g_plus: f64,
}

impl Prescription {
    /// Everyone plays `-1`.
    pub const HERD_MINUS: Prescription = Prescription {
        g_minus: 0.0,
        g_plus: 0.0,
    };
    /// Everyone plays `+1`.
    pub const HERD_PLUS: Prescription = Prescription {
        g_minus: 1.0,
        g_plus: 1.0,
    };
    /// Each type plays its preferred action.
    pub const TRUTHFUL: Prescription = Prescription {
        g_minus: 0.0,
        g_plus: 1.0,
    };
    /// Each type plays against its preference.
    pub const CONTRARIAN: Prescription = Prescription {
        g_minus: 1.0,
        g_plus: 0.0,
    };

    pub fn new(g_minus: f64, g_plus: f64) -> Result<Self, Error> {
        Ok(Prescription {
            g_minus: check_unit("prescription g_minus", g_minus)?,
            g_plus: check_unit("prescription g_plus", g_plus)?,
        })
    }

    /// Probability of action `+1` given type `-1`.
    #[inline]
    pub fn g_minus(&self) -> f64 {
        self.g_minus
    }

    /// Probability of action `+1` given type `+1`.
    #[inline]
    pub fn g_plus(&self) -> f64 {
        self.g_plus
    }

    #[inline]
    pub fn prob_plus(&self, x: AgentType) -> f64 {
        match x {
            AgentType::Minus => self.g_minus,
            AgentType::Plus => self.g_plus,
        }
    }

    /// `gamma(a | x)`.
    #[inline]
    pub fn prob(&self, a: Action, x: AgentType) -> f64 {
        let p = self.prob_plus(x);
        match a {
            Action::Plus => p,
            Action::Minus => 1.0 - p,
        }
    }

    pub(crate) fn with_prob_plus(mut self, x: AgentType, p: f64) -> Self {
        match x {
            AgentType::Minus => self.g_minus = p,
            AgentType::Plus => self.g_plus = p,
        }
        self
    }

    /// Image under relabelling `+1 <-> -1` for both types and actions.
    pub fn flipped(&self) -> Self {
        Prescription {
            g_minus: 1.0 - self.g_plus,
            g_plus: 1.0 - self.g_minus,
        }
    }

    pub fn is_pure(&self) -> bool {
        [self.g_minus, self.g_plus]
            .iter()
            .all(|&g| g == 0.0 || g == 1.0)
    }

    /// Whether actions carry no information about types.
    pub fn is_type_independent(&self, tol: f64) -> bool {
        (self.g_minus - self.g_plus).abs() <= tol
    }
}

/// `G(z, gamma)`: mass playing `+1`.
#[inline]
pub fn action_mean_field(z: TypeMeanField, gamma: &Prescription) -> ActionMeanField {
    let mu1 = (1.0 - z.z1()) * gamma.g_minus + z.z1() * gamma.g_plus;
    ActionMeanField(mu1.clamp(0.0, 1.0))
}

/// One Fokker-Planck step `phi(z, gamma)`.
pub fn propagate(z: TypeMeanField, gamma: &Prescription, params: &ModelParams) -> TypeMeanField {
    let mut z1 = 0.0;
    for x in AgentType::ALL {
        for a in Action::ALL {
            z1 += z.mass(x) * gamma.prob(a, x) * transition_prob(AgentType::Plus, x, a, params);
        }
    }
    TypeMeanField::clamped(z1)
}

/// Intercept and slope of the affine map `z1 -> phi(z1, gamma)`.
pub fn propagate_affine(gamma: &Prescription, params: &ModelParams) -> (f64, f64) {
    let stay_plus = 1.0 - gamma.g_plus * params.p1() - (1.0 - gamma.g_plus) * params.p2();
    let enter_plus = gamma.g_minus * params.p2() + (1.0 - gamma.g_minus) * params.p1();
    (enter_plus, stay_plus - enter_plus)
}

/// Fixed point of `phi(., gamma)` for a state-independent prescription.
///
/// Fails only when the step is the identity (`p1 = 0` under truthful play),
/// where every state is stationary.
pub fn stationary_mean_field(
    gamma: &Prescription,
    params: &ModelParams,
) -> Result<TypeMeanField, Error> {
    let (intercept, slope) = propagate_affine(gamma, params);
    let gap = 1.0 - slope;
    if gap <= f64::EPSILON {
        return Err(Error::InvalidOption {
            name: "prescription",
            reason: "mean-field step is the identity; stationary point is not unique",
        });
    }
    Ok(TypeMeanField::clamped(intercept / gap))
}
