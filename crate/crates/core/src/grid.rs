//! Uniform vertex-centred grids on `[0, b]^dim` and nodal scalar fields.
//!
//! Two-dimensional fields are stored row-major with the row index running
//! along x, so `values[i * n + j]` holds `u(x(i), y(j))` (0-based indices).

use crate::error::{Error, Result};

/// Relative tolerance on `b / h` being a whole number.
const RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    b: f64,
    h: f64,
    n: usize,
}

/// Builds a grid with `round(b/h) + 1` nodes per axis.
pub fn build_grid(dim: usize, b: f64, h: f64) -> Result<GridSpec> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
    }
    if !(b > 0.0 && b.is_finite()) || !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "need b > 0 and h > 0, got b = {b}, h = {h}"
        )));
    }
    let ratio = b / h;
    let cells = ratio.round();
    if (ratio - cells).abs() > RATIO_TOL * ratio || cells < 1.0 {
        return Err(Error::NonIntegralRatio { b, h });
    }
    Ok(GridSpec {
        dim,
        b,
        h,
        n: cells as usize + 1,
    })
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Domain edge length.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Node spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of the 0-based node `i`. The last node is pinned to `b`.
    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.b
        } else {
            i as f64 * self.h
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Flat index of node `(i, j)` in a 2D field.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Same dimension and edge length, spacing divided by `factor`.
    pub fn refined(&self, factor: usize) -> GridSpec {
        let cells = (self.n - 1) * factor;
        GridSpec {
            dim: self.dim,
            b: self.b,
            h: self.b / cells as f64,
            n: cells + 1,
        }
    }
}

/// Nodal values of `u` on a grid. Entries are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    /// Wraps values produced internally by a stepper; the caller has already
    /// screened them for non-finite entries.
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let xs = grid.coords();
        let values = match grid.dim() {
            1 => xs.iter().map(|&x| f(&[x])).collect(),
            _ => {
                let mut v = Vec::with_capacity(grid.len());
                for &x in &xs {
                    for &y in &xs {
                        v.push(f(&[x, y]));
                    }
                }
                v
            }
        };
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at 0-based node `(i, j)` of a 2D field.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Pointwise `a * self + c * other`.
    pub fn axpby(&self, a: f64, other: &ScalarField, c: f64) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch {
                expected: self.grid.len(),
                got: other.grid.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + c * v)
            .collect();
        ScalarField::new(self.grid, values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
        ScalarField::new(self.grid, self.values.iter().map(|&u| f(u)).collect())
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Image under the point reflection `i -> N-1-i` (and `j -> N-1-j` in 2D).
    pub fn reflected(&self) -> ScalarField {
        let mut values = self.values.clone();
        values.reverse();
        ScalarField::from_parts(self.grid, values)
    }
}

/// Second-order one-sided extrapolation enforcing a zero end derivative:
/// `u_0 = (4 u_1 - u_2) / 3`.
#[inline]
pub(crate) fn neumann_extrapolate(next: f64, next_next: f64) -> f64 {
    (4.0 * next - next_next) / 3.0
}

/// Refills every boundary node of a 2D field from the interior with the
/// one-sided extrapolation, corners taking the mean of the x- and y-direction
/// extrapolations.
pub(crate) fn close_boundary_2d(grid: &GridSpec, u: &mut [f64]) {
    let n = grid.n();
    let at = |i: usize, j: usize| i * n + j;
    for k in 1..n - 1 {
        u[at(0, k)] = neumann_extrapolate(u[at(1, k)], u[at(2, k)]);
        u[at(n - 1, k)] = neumann_extrapolate(u[at(n - 2, k)], u[at(n - 3, k)]);
        u[at(k, 0)] = neumann_extrapolate(u[at(k, 1)], u[at(k, 2)]);
        u[at(k, n - 1)] = neumann_extrapolate(u[at(k, n - 2)], u[at(k, n - 3)]);
    }
    let corner = |u: &[f64], (ci, cj): (usize, usize), (di, dj): (isize, isize)| {
        let step = |c: usize, d: isize, s: isize| (c as isize + d * s) as usize;
        let along_x = neumann_extrapolate(u[at(step(ci, di, 1), cj)], u[at(step(ci, di, 2), cj)]);
        let along_y = neumann_extrapolate(u[at(ci, step(cj, dj, 1))], u[at(ci, step(cj, dj, 2))]);
        0.5 * (along_x + along_y)
    };
    let last = n - 1;
    u[at(0, 0)] = corner(u, (0, 0), (1, 1));
    u[at(0, last)] = corner(u, (0, last), (1, -1));
    u[at(last, 0)] = corner(u, (last, 0), (-1, 1));
    u[at(last, last)] = corner(u, (last, last), (-1, -1));
}

pub(crate) fn close_boundary_1d(u: &mut [f64]) {
    let n = u.len();
    u[0] = neumann_extrapolate(u[1], u[2]);
    u[n - 1] = neumann_extrapolate(u[n - 2], u[n - 3]);
}

/// Index of the first non-finite entry, if any.
pub(crate) fn first_non_finite(values: &[f64]) -> Option<usize> {
    values.iter().position(|v| !v.is_finite())
}

/// The implicit steppers need at least two interior nodes per axis for the
/// boundary extrapolation to be well defined.
pub(crate) fn require_stepper_grid(grid: &GridSpec) -> Result<()> {
    if grid.n() < 4 {
        return Err(Error::InvalidGrid(format!(
            "time stepping needs at least 4 nodes per axis, got {}",
            grid.n()
        )));
    }
    Ok(())
}
