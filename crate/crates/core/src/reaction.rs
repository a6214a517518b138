//! The nonlocal reaction `f(u) = u^α (1 - ∫u)` and its frozen-mass
//! linearisation `f'(u) = α u^{α-1} (1 - ∫u)`.
//!
//! The mass is evaluated once per time level and held fixed while
//! differentiating, so `f'` is a pointwise coefficient.

use crate::error::{Error, Result};
use crate::functionals::{self, power};
use crate::grid::ScalarField;

/// Undershoots above this level are clamped; anything lower is treated as a
/// solver failure when the power is fractional.
pub const NEGATIVITY_TOLERANCE: f64 = -1e-8;

#[derive(Debug, Clone)]
pub struct ReactionEval {
    pub f: Vec<f64>,
    pub fprime: Vec<f64>,
    pub mass: f64,
    /// Some node was below zero and got clamped.
    pub clamped: bool,
}

pub fn eval_reaction(u: &ScalarField, alpha: f64) -> Result<ReactionEval> {
    let fractional = alpha.fract() != 0.0;
    let mut clamped = false;
    if fractional {
        for (index, &value) in u.values().iter().enumerate() {
            if value < NEGATIVITY_TOLERANCE {
                return Err(Error::NegativePower { index, value, alpha });
            }
            clamped |= value < 0.0;
        }
    }
    let mass = functionals::mass(u);
    let deficit = 1.0 - mass;
    let mut f = Vec::with_capacity(u.values().len());
    let mut fprime = Vec::with_capacity(u.values().len());
    for &value in u.values() {
        let v = if fractional { value.max(0.0) } else { value };
        f.push(power(v, alpha) * deficit);
        fprime.push(if alpha == 0.0 {
            0.0
        } else {
            alpha * power(v, alpha - 1.0) * deficit
        });
    }
    Ok(ReactionEval {
        f,
        fprime,
        mass,
        clamped,
    })
}

/// Zero reaction, used by the heat mode.
pub fn zero_reaction(u: &ScalarField) -> ReactionEval {
    let n = u.values().len();
    ReactionEval {
        f: vec![0.0; n],
        fprime: vec![0.0; n],
        mass: functionals::mass(u),
        clamped: false,
    }
}
