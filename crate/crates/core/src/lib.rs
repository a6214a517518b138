//! Finite-difference simulation of the nonlocal Fisher–KPP problem
//!
//! ```text
//! u_t = Δu + u^α (1 - ∫_Ω u dx),   ∂u/∂ν = 0 on ∂Ω,   Ω = [0, b]^n, n = 1, 2
//! ```
//!
//! with a linearised ADI scheme in two dimensions, a linearised
//! Crank–Nicolson scheme in one, a forward-Euler reference solver, and checks
//! of the mass laws `min{1, m0} <= m(t) <= max{1, m0}`,
//! `|1 - m(t)| <= |1 - m0| e^{-min{1, m0^α} t}` and `m' = (1 - m) ∫u^α`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adi2d;
pub mod checks;
pub mod config;
pub mod error;
pub mod explicit;
pub mod functionals;
pub mod grid;
pub mod heat_compare;
pub mod initial;
pub mod io;
pub mod params;
pub mod reaction;
pub mod runner;
pub mod series;
pub mod sim;
pub mod solver1d;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{build_grid, GridSpec, ScalarField};
pub use initial::{build_field, InitialConditionSpec};
pub use params::{Mode, SimParams, StartupPhase};
pub use series::{MassRecord, MassSeries};
