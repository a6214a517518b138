//! Forward-Euler reference solver.
//!
//! Only used as a brute-force oracle for the implicit steppers on small grids
//! and short horizons. Uses the same second differences, reaction and
//! boundary extrapolation as the production steppers.

use crate::error::{Error, Result};
use crate::grid::{close_boundary_1d, close_boundary_2d, first_non_finite, require_stepper_grid, ScalarField};
use crate::params::{Mode, Segment};
use crate::reaction::{eval_reaction, zero_reaction};

#[derive(Debug, Clone, Copy)]
pub struct ExplicitParams {
    pub tau_ref: f64,
    /// Enforce `tau_ref <= h² / (4 dim)`.
    pub cfl_guard: bool,
    pub blowup_threshold: f64,
}

impl ExplicitParams {
    pub fn new(tau_ref: f64) -> Self {
        Self {
            tau_ref,
            cfl_guard: true,
            blowup_threshold: 1e8,
        }
    }
}

fn cfl_bound(u: &ScalarField) -> f64 {
    let h = u.grid().h();
    h * h / (4.0 * u.grid().dim() as f64)
}

/// One forward-Euler step of length `tau`.
pub fn explicit_step(
    u: &ScalarField,
    alpha: f64,
    mode: Mode,
    tau: f64,
    params: &ExplicitParams,
) -> Result<ScalarField> {
    require_stepper_grid(u.grid())?;
    if !(tau > 0.0) {
        return Err(Error::ValidationError(format!("explicit step must be > 0, got {tau}")));
    }
    if params.cfl_guard && tau > cfl_bound(u) {
        return Err(Error::CflViolation {
            tau_ref: tau,
            bound: cfl_bound(u),
        });
    }
    let reaction = match mode {
        Mode::NonlocalKpp => eval_reaction(u, alpha)?,
        Mode::Heat => zero_reaction(u),
    };
    let grid = *u.grid();
    let n = grid.n();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let v = u.values();
    let mut next = v.to_vec();
    match grid.dim() {
        1 => {
            for i in 1..n - 1 {
                let lap = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv_h2;
                next[i] = v[i] + tau * (lap + reaction.f[i]);
            }
            close_boundary_1d(&mut next);
        }
        _ => {
            for i in 1..n - 1 {
                for j in 1..n - 1 {
                    let k = grid.idx(i, j);
                    let lap = (v[k + n] + v[k - n] + v[k + 1] + v[k - 1] - 4.0 * v[k]) * inv_h2;
                    next[k] = v[k] + tau * (lap + reaction.f[k]);
                }
            }
            close_boundary_2d(&grid, &mut next);
        }
    }
    let max_u = next.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if first_non_finite(&next).is_some() || max_u > params.blowup_threshold {
        return Err(Error::BlowupDetected { t: f64::NAN, max_u });
    }
    Ok(ScalarField::from_parts(grid, next))
}

/// Integrates from `t = 0` to `t_final`, the last micro-step truncated to
/// land on the horizon.
pub fn explicit_run(
    u0: &ScalarField,
    alpha: f64,
    mode: Mode,
    t_final: f64,
    params: &ExplicitParams,
) -> Result<ScalarField> {
    let seg = Segment::new(0.0, t_final, params.tau_ref);
    let mut u = u0.clone();
    let mut t = 0.0;
    for k in 1..=seg.steps {
        let t_next = seg.time_after(k);
        u = explicit_step(&u, alpha, mode, t_next - t, params).map_err(|e| match e {
            Error::BlowupDetected { max_u, .. } => Error::BlowupDetected { t: t_next, max_u },
            other => other,
        })?;
        t = t_next;
    }
    Ok(u)
}
