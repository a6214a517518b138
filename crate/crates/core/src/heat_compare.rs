//! Long-time comparison of the nonlocal problem with the heat equation.
//!
//! Both solutions start with the same mass `m0`. The heat solution keeps that
//! mass while the nonlocal one relaxes to mass 1, so their difference
//! approaches the constant `1 - m0`; the distance
//! `d(t) = ||u - v - (1 - m0)||_{L²}` should decay exponentially.

use crate::error::{Error, Result};
use crate::functionals::{lk_norm, mass};
use crate::grid::{GridSpec, ScalarField};
use crate::initial::{build_field, InitialConditionSpec};
use crate::params::{Mode, SimParams};
use crate::sim::Simulation;

/// Allowed difference between the two initial masses.
pub const MASS_MATCH_TOL: f64 = 1e-6;

/// Values below this are floored before taking logarithms.
const LOG_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayPoint {
    pub t: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecaySeries {
    pub m0: f64,
    pub points: Vec<DecayPoint>,
}

impl DecaySeries {
    pub fn last(&self) -> Option<&DecayPoint> {
        self.points.last()
    }

    /// Scales every distance by `s`.
    pub fn scaled(&self, s: f64) -> DecaySeries {
        DecaySeries {
            m0: self.m0,
            points: self.points.iter().map(|p| DecayPoint { t: p.t, d: s * p.d }).collect(),
        }
    }
}

/// `||u - v - (1 - m0)||_{L²}`.
pub fn distance(u: &ScalarField, v: &ScalarField, m0: f64) -> Result<f64> {
    let diff = u.axpby(1.0, v, -1.0)?.map(|x| x - (1.0 - m0))?;
    lk_norm(&diff, 2.0)
}

pub fn run_pair(
    ic_u: &InitialConditionSpec,
    ic_v: &InitialConditionSpec,
    grid: GridSpec,
    params: SimParams,
) -> Result<DecaySeries> {
    run_pair_fields(build_field(ic_u, grid)?, build_field(ic_v, grid)?, params)
}

/// Advances `u` (nonlocal mode) and `v` (heat mode) in lockstep on the same
/// step schedule, recording `d(t)` at the record times of `params`.
pub fn run_pair_fields(u0: ScalarField, v0: ScalarField, params: SimParams) -> Result<DecaySeries> {
    let (mass_u, mass_v) = (mass(&u0), mass(&v0));
    if (mass_u - mass_v).abs() > MASS_MATCH_TOL {
        return Err(Error::MassMismatch { mass_u, mass_v });
    }
    let m0 = mass_u;
    let mut u = Simulation::new(
        u0,
        SimParams {
            mode: Mode::NonlocalKpp,
            ..params
        },
    )?;
    let mut v = Simulation::new(
        v0,
        SimParams {
            mode: Mode::Heat,
            ..params
        },
    )?;
    let mut series = DecaySeries {
        m0,
        points: vec![DecayPoint {
            t: 0.0,
            d: distance(u.field(), v.field(), m0)?,
        }],
    };
    while u.advance()? {
        v.advance()?;
        if u.steps() % params.record_every == 0 || u.is_done() {
            series.points.push(DecayPoint {
                t: u.t(),
                d: distance(u.field(), v.field(), m0)?,
            });
        }
    }
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub c1: f64,
    pub c2: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares fit of `log d = log C1 - C2 t` over `t_a <= t <= t_b`.
pub fn fit_exponential(series: &DecaySeries, window: (f64, f64)) -> Result<ExpFit> {
    let (t_a, t_b) = window;
    let pts: Vec<(f64, f64)> = series
        .points
        .iter()
        .filter(|p| p.t >= t_a && p.t <= t_b)
        .map(|p| (p.t, p.d.max(LOG_FLOOR).ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} samples in window [{t_a}, {t_b}], need at least 5",
            pts.len()
        )));
    }
    let line = line_fit(&pts)?;
    Ok(ExpFit {
        c1: line.intercept.exp(),
        c2: -line.slope,
        r_squared: line.r_squared,
        samples: pts.len(),
    })
}

pub(crate) struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = intercept + slope x`.
pub(crate) fn line_fit(pts: &[(f64, f64)]) -> Result<LineFit> {
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pts {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all samples share one abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = pts.iter().map(|&(x, y)| (y - intercept - slope * x).powi(2)).sum();
    // A constant series is fitted exactly.
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LineFit {
        intercept,
        slope,
        r_squared,
    })
}

/// Second half of the run.
pub fn default_window(t_final: f64) -> (f64, f64) {
    (0.5 * t_final, t_final)
}
