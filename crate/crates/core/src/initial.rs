//! Closed-form initial data for the preset experiments.

use std::f64::consts::PI;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::io;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialConditionSpec {
    /// `(-2x³ + 3x² + c_x)(-2y³ + 3y² + c_y)`; the y factor is dropped in 1D.
    PolyProduct {
        c_x: f64,
        c_y: f64,
    },
    /// `height` on the block `[x_lo, x_lo + side)^dim`, zero elsewhere.
    CharacteristicBlock {
        x_lo: f64,
        side: f64,
        height: f64,
    },
    Constant {
        value: f64,
    },
    /// `mean + amplitude · ∏ cos(π x_k / b)`, the slowest Neumann heat mode.
    HeatEigenmode {
        amplitude: f64,
        mean: f64,
    },
    /// Snapshot CSV as written by [`io::write_snapshot`].
    FromFile {
        path: PathBuf,
    },
}

fn smoothstep(x: f64) -> f64 {
    -2.0 * x * x * x + 3.0 * x * x
}

/// Nodal membership in a block. The upper edge is excluded so that a block of
/// side `s·h` covers exactly `s` nodes per axis, which makes the quadrature
/// mass equal `height · side^dim` for grid-aligned blocks.
fn in_block(x: f64, lo: f64, side: f64, h: f64) -> bool {
    let eps = 1e-9 * h;
    x >= lo - eps && x < lo + side - eps
}

pub fn build_field(ic: &InitialConditionSpec, grid: GridSpec) -> Result<ScalarField> {
    let b = grid.b();
    let h = grid.h();
    match *ic {
        InitialConditionSpec::PolyProduct { c_x, c_y } => ScalarField::from_fn(grid, |p| {
            let fx = smoothstep(p[0]) + c_x;
            match p.get(1) {
                Some(&y) => fx * (smoothstep(y) + c_y),
                None => fx,
            }
        }),
        InitialConditionSpec::CharacteristicBlock { x_lo, side, height } => {
            if !(side > 0.0) || !(height >= 0.0) {
                return Err(Error::ValidationError(format!(
                    "block needs side > 0 and height >= 0, got side = {side}, height = {height}"
                )));
            }
            ScalarField::from_fn(grid, |p| {
                if p.iter().all(|&x| in_block(x, x_lo, side, h)) {
                    height
                } else {
                    0.0
                }
            })
        }
        InitialConditionSpec::Constant { value } => ScalarField::constant(grid, value),
        InitialConditionSpec::HeatEigenmode { amplitude, mean } => ScalarField::from_fn(grid, |p| {
            mean + amplitude * p.iter().map(|&x| (PI * x / b).cos()).product::<f64>()
        }),
        InitialConditionSpec::FromFile { ref path } => {
            let field = io::read_snapshot(path, grid.dim(), b)?;
            if field.grid().n() != grid.n() {
                return Err(Error::FileError {
                    path: path.display().to_string(),
                    reason: format!("expected {} nodes per axis, found {}", grid.n(), field.grid().n()),
                });
            }
            Ok(ScalarField::from_parts(grid, field.into_values()))
        }
    }
}
