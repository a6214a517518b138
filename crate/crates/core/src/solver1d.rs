//! Linearised Crank–Nicolson step on `[0, b]`:
//!
//! ```text
//! [1 - τ/2 δx² - τ/2 f'(u^k)] u^{k+1} = [1 + τ/2 δx²] u^k + τ f(u^k) - τ/2 f'(u^k) u^k
//! ```
//!
//! with the same one-sided Neumann extrapolation as the 2D sweeps.

use crate::adi2d::{assemble_line, finish_step, AdiStepReport};
use crate::error::{Error, Result};
use crate::functionals;
use crate::grid::{close_boundary_1d, require_stepper_grid, ScalarField};
use crate::params::{Mode, SimParams};
use crate::reaction::{eval_reaction, zero_reaction};
use crate::tridiag::thomas_solve;

#[derive(Debug, Clone, PartialEq)]
pub struct Cn1dState {
    pub field: ScalarField,
    pub mass: f64,
}

impl Cn1dState {
    pub fn new(field: ScalarField) -> Self {
        let mass = functionals::mass(&field);
        Self { field, mass }
    }
}

pub fn cn1d_step(state: &Cn1dState, params: &SimParams) -> Result<Cn1dState> {
    let report = cn1d_step_report(&state.field, params)?;
    Ok(Cn1dState {
        mass: report.mass_after,
        field: report.new_field,
    })
}

/// Same as [`cn1d_step`] with the full step diagnostics.
pub fn cn1d_step_report(u: &ScalarField, params: &SimParams) -> Result<AdiStepReport> {
    let grid = *u.grid();
    if grid.dim() != 1 {
        return Err(Error::InvalidGrid(format!(
            "1D step needs a 1D grid, got dim {}",
            grid.dim()
        )));
    }
    require_stepper_grid(&grid)?;
    let tau = params.tau;
    let reaction = match params.mode {
        Mode::NonlocalKpp => eval_reaction(u, params.alpha)?,
        Mode::Heat => zero_reaction(u),
    };
    let n = grid.n();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let v = u.values();
    let rhs: Vec<f64> = (1..n - 1)
        .map(|i| {
            let dxx = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv_h2;
            v[i] + 0.5 * tau * dxx + tau * reaction.f[i] - 0.5 * tau * reaction.fprime[i] * v[i]
        })
        .collect();
    let sys = assemble_line(&reaction.fprime[1..n - 1], &rhs, tau, grid.h());
    let margin = sys.dominance_margin();
    let interior = thomas_solve(&sys)?;
    let mut next = vec![0.0; n];
    next[1..n - 1].copy_from_slice(&interior);
    close_boundary_1d(&mut next);
    finish_step(ScalarField::from_parts(grid, next), margin, params)
}
