//! Composite-trapezoid quadrature and the norms built on it.
//!
//! Every integral in the crate, including the nonlocal mass inside the
//! reaction term, goes through [`integrate`], so diagnostics and the solver
//! see bit-identical masses. Sums run in a fixed order.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

/// One-dimensional trapezoid weights: `h/2` at the ends, `h` inside.
pub fn trapezoid_weights(grid: &GridSpec) -> Vec<f64> {
    let n = grid.n();
    let h = grid.h();
    (0..n).map(|i| if i == 0 || i + 1 == n { 0.5 * h } else { h }).collect()
}

/// Trapezoid quadrature of `g(u)` over the grid.
pub fn integrate(u: &ScalarField, g: impl Fn(f64) -> f64) -> f64 {
    let grid = u.grid();
    let w = trapezoid_weights(grid);
    let v = u.values();
    match grid.dim() {
        1 => w.iter().zip(v).map(|(wi, &ui)| wi * g(ui)).sum(),
        _ => {
            let n = grid.n();
            let mut total = 0.0;
            for (i, wi) in w.iter().enumerate() {
                let row = &v[i * n..(i + 1) * n];
                let line: f64 = w.iter().zip(row).map(|(wj, &uij)| wj * g(uij)).sum();
                total += wi * line;
            }
            total
        }
    }
}

/// Total mass `∫ u dx`.
pub fn mass(u: &ScalarField) -> f64 {
    integrate(u, |x| x)
}

/// `u^p` with the conventions used throughout: `u^0 = 1` (also at `u = 0`),
/// integer powers keep the sign of `u`, fractional powers of non-positive
/// values are 0.
#[inline]
pub fn power(u: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
        u.powi(p as i32)
    } else if u <= 0.0 {
        0.0
    } else {
        u.powf(p)
    }
}

/// `∫ u^α dx` with negative undershoots clamped to 0.
pub fn integral_of_power(u: &ScalarField, alpha: f64) -> f64 {
    integrate(u, |x| power(x.max(0.0), alpha))
}

/// `(∫ |u|^k)^{1/k}`; for fractional `k` negative values count as 0.
pub fn lk_norm(u: &ScalarField, k: f64) -> Result<f64> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::InvalidOrder(k));
    }
    let integral = if k.fract() == 0.0 {
        integrate(u, |x| power(x.abs(), k))
    } else {
        integrate(u, |x| power(x.max(0.0), k))
    };
    Ok(if k == 1.0 { integral } else { integral.powf(1.0 / k) })
}

/// Maximum absolute nodal value.
pub fn linf(u: &ScalarField) -> f64 {
    u.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}
