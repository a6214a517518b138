//! Thomas algorithm for tridiagonal systems.
//!
//! No pivoting: the ADI line systems are diagonally dominant in the intended
//! operating regime, and a vanishing pivot is reported instead of repaired.

use crate::error::{Error, Result};

/// Relative pivot floor against the largest diagonal magnitude.
const PIVOT_FLOOR: f64 = 1e-14;

/// `A x = rhs` with `A` given by its three diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    /// Sub-diagonal, length `M - 1`.
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// Super-diagonal, length `M - 1`.
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < m {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Minimum over rows of `|diag| - |lower| - |upper|`.
    pub fn dominance_margin(&self) -> f64 {
        dominance_margin(&self.lower, &self.diag, &self.upper)
    }
}

pub(crate) fn dominance_margin(lower: &[f64], diag: &[f64], upper: &[f64]) -> f64 {
    let m = diag.len();
    (0..m)
        .map(|i| {
            let l = if i > 0 { lower[i - 1].abs() } else { 0.0 };
            let u = if i + 1 < m { upper[i].abs() } else { 0.0 };
            diag[i].abs() - l - u
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn thomas_solve(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let m = sys.len();
    if m == 0 || sys.lower.len() + 1 != m || sys.upper.len() + 1 != m || sys.rhs.len() != m {
        return Err(Error::ShapeMismatch {
            expected: m,
            got: sys.rhs.len(),
        });
    }
    let mut x = sys.rhs.clone();
    let mut scratch = vec![0.0; m];
    solve_in_place(&sys.lower, &sys.diag, &sys.upper, &mut x, &mut scratch)?;
    Ok(x)
}

/// Overwrites `rhs` with the solution. `scratch` must hold at least `M`
/// values; its contents on return are unspecified.
pub(crate) fn solve_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) -> Result<()> {
    let m = diag.len();
    let scale = diag.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
    let floor = PIVOT_FLOOR * scale;

    let mut pivot = diag[0];
    if pivot.abs() < floor || pivot == 0.0 {
        return Err(Error::ZeroPivot { row: 0, pivot });
    }
    rhs[0] /= pivot;
    for i in 1..m {
        scratch[i - 1] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i - 1] * scratch[i - 1];
        if pivot.abs() < floor || pivot == 0.0 {
            return Err(Error::ZeroPivot { row: i, pivot });
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / pivot;
    }
    for i in (0..m - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
    Ok(())
}
