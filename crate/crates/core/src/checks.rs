//! Checks of the mass laws, blow-up surveillance and self-convergence order.
//!
//! Every check is a pure function of recorded data; none re-runs a solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::heat_compare::line_fit;
use crate::series::MassSeries;
use crate::sim::{RunOutcome, RunStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub passed: bool,
    /// Signed margin by which the bound held (positive) or failed (negative).
    pub worst_slack: f64,
    /// Time of the worst margin.
    pub location_t: f64,
    pub details: String,
}

impl CheckReport {
    fn from_slack(name: &str, worst_slack: f64, location_t: f64, tolerance: f64, details: String) -> Self {
        Self {
            check_name: name.to_string(),
            passed: worst_slack >= -tolerance,
            worst_slack,
            location_t,
            details,
        }
    }
}

/// `min{1, m0} <= m(t) <= max{1, m0}` for every record, up to `tol`.
pub fn check_mass_bounds(series: &MassSeries, m0: f64, tol: f64) -> Result<CheckReport> {
    let first = series.first().ok_or(Error::EmptySeries)?;
    let (lo, hi) = (m0.min(1.0), m0.max(1.0));
    let (worst, at) = series
        .records()
        .iter()
        .map(|r| ((r.mass - lo).min(hi - r.mass), r.t))
        .fold((f64::INFINITY, first.t), |acc, x| if x.0 < acc.0 { x } else { acc });
    Ok(CheckReport::from_slack(
        "mass_bounds",
        worst,
        at,
        tol,
        format!(
            "bounds [{lo}, {hi}], tol {tol}; discrete m(0) = {} vs m0 = {m0} (diff {:e})",
            first.mass,
            first.mass - m0
        ),
    ))
}

/// Exponential rate of the mass-decay envelope, `min{1, m0^α}`.
pub fn decay_rate(m0: f64, alpha: f64) -> f64 {
    1.0_f64.min(m0.powf(alpha))
}

/// `|1 - m(t)| <= slack_factor |1 - m0| exp(-min{1, m0^α} t)` for every record.
pub fn check_mass_decay(series: &MassSeries, m0: f64, alpha: f64, slack_factor: f64) -> Result<CheckReport> {
    let first = series.first().ok_or(Error::EmptySeries)?;
    let rate = decay_rate(m0, alpha);
    let amp = slack_factor * (1.0 - m0).abs();
    let (worst, at) = series
        .records()
        .iter()
        .map(|r| (amp * (-rate * r.t).exp() - (1.0 - r.mass).abs(), r.t))
        .fold((f64::INFINITY, first.t), |acc, x| if x.0 < acc.0 { x } else { acc });
    Ok(CheckReport::from_slack(
        "mass_decay",
        worst,
        at,
        0.0,
        format!(
            "envelope {slack_factor} * {} * exp(-{rate} t); discrete m(0) = {} vs m0 = {m0} (diff {:e})",
            (1.0 - m0).abs(),
            first.mass,
            first.mass - m0
        ),
    ))
}

/// Default tolerance of the mass-ODE residual for time step `tau`.
pub fn ode_tolerance(tau: f64) -> f64 {
    1e-2_f64.max(10.0 * tau)
}

/// Compares a three-point difference of `m(t)` with `(1 - m) ∫u^α` at the
/// interior records. Uneven record spacing is handled by the second-order
/// non-uniform formula.
pub fn check_mass_ode_residual(series: &MassSeries, tol: f64) -> Result<CheckReport> {
    let r = series.records();
    if r.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut worst = f64::INFINITY;
    let mut at = r[0].t;
    let mut max_residual: f64 = 0.0;
    for w in r.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let (h1, h2) = (b.t - a.t, c.t - b.t);
        let dm = (h1 * h1 * (c.mass - b.mass) + h2 * h2 * (b.mass - a.mass)) / (h1 * h2 * (h1 + h2));
        let residual = (dm - (1.0 - b.mass) * b.int_u_alpha).abs();
        max_residual = max_residual.max(residual);
        if tol - residual < worst {
            worst = tol - residual;
            at = b.t;
        }
    }
    if r.len() < 3 {
        worst = tol;
    }
    Ok(CheckReport::from_slack(
        "mass_ode_residual",
        worst,
        at,
        0.0,
        format!("max |m' - (1 - m) int u^alpha| = {max_residual:e}, tol {tol:e}"),
    ))
}

/// Mass moves monotonically towards 1: nondecreasing for `m0 < 1`,
/// nonincreasing for `m0 > 1`, each record allowed to move back by at most
/// `per_record_slack`. Pairs starting within `band` of 1 are skipped.
pub fn check_mass_monotone(series: &MassSeries, m0: f64, per_record_slack: f64, band: f64) -> Result<CheckReport> {
    let r = series.records();
    let first = r.first().ok_or(Error::EmptySeries)?;
    let direction = (1.0 - m0).signum();
    let mut worst = f64::INFINITY;
    let mut at = first.t;
    for w in r.windows(2) {
        if (1.0 - w[0].mass).abs() < band {
            continue;
        }
        let step = direction * (w[1].mass - w[0].mass);
        if step < worst {
            worst = step;
            at = w[1].t;
        }
    }
    if !worst.is_finite() {
        worst = 0.0;
    }
    let trend = if direction > 0.0 {
        "nondecreasing"
    } else {
        "nonincreasing"
    };
    Ok(CheckReport::from_slack(
        "mass_monotone",
        worst,
        at,
        per_record_slack,
        format!("mass {trend} up to {per_record_slack:e} per record while |1 - m| >= {band:e}"),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlowupVerdict {
    Global,
    BlowupAt(f64),
}

/// Global iff the run reached its horizon with every record finite and below
/// the blow-up threshold.
pub fn detect_blowup(outcome: &RunOutcome) -> BlowupVerdict {
    if let RunStatus::Blowup { t, .. } = outcome.status {
        return BlowupVerdict::BlowupAt(t);
    }
    if let Some(r) = outcome
        .series
        .records()
        .iter()
        .find(|r| !r.max_u.is_finite() || r.max_u.abs().max(r.min_u.abs()) > outcome.blowup_threshold)
    {
        return BlowupVerdict::BlowupAt(r.t);
    }
    if outcome.final_t < outcome.t_final {
        return BlowupVerdict::BlowupAt(outcome.final_t);
    }
    BlowupVerdict::Global
}

pub fn blowup_report(outcome: &RunOutcome) -> CheckReport {
    let verdict = detect_blowup(outcome);
    let last = outcome.series.last();
    let (passed, t, details) = match verdict {
        BlowupVerdict::Global => (
            true,
            outcome.final_t,
            format!(
                "global to t = {}; final mass {}, final max {}",
                outcome.final_t,
                last.map_or(f64::NAN, |r| r.mass),
                last.map_or(f64::NAN, |r| r.max_u)
            ),
        ),
        BlowupVerdict::BlowupAt(t) => (false, t, format!("blow-up at t = {t}")),
    };
    CheckReport {
        check_name: "global_existence".into(),
        passed,
        worst_slack: if passed { 0.0 } else { -1.0 },
        location_t: t,
        details,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefineAxis {
    Space,
    Time,
}

impl std::str::FromStr for RefineAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "space" => Ok(RefineAxis::Space),
            "time" => Ok(RefineAxis::Time),
            other => Err(format!("unknown axis `{other}` (expected space or time)")),
        }
    }
}

/// A solution at a comparison time.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub t: f64,
    pub field: &'a ScalarField,
}

impl<'a> From<&'a RunOutcome> for Sample<'a> {
    fn from(run: &'a RunOutcome) -> Self {
        Sample {
            t: run.final_t,
            field: &run.final_field,
        }
    }
}

/// Values of `field` at the nodes of a grid `stride` times coarser.
fn restrict(field: &ScalarField, stride: usize) -> Vec<f64> {
    let g = field.grid();
    let nc = (g.n() - 1) / stride + 1;
    match g.dim() {
        1 => (0..nc).map(|i| field.values()[i * stride]).collect(),
        _ => {
            let mut v = Vec::with_capacity(nc * nc);
            for i in 0..nc {
                for j in 0..nc {
                    v.push(field.at(i * stride, j * stride));
                }
            }
            v
        }
    }
}

/// Richardson self-convergence order `log2(|u_c - u_m| / |u_m - u_f|)` in the
/// max norm over the coarse node set.
pub fn estimate_order(coarse: Sample, medium: Sample, fine: Sample, axis: RefineAxis) -> Result<f64> {
    let tol_t = 1e-12 * coarse.t.abs().max(1.0);
    if (coarse.t - medium.t).abs() > tol_t || (medium.t - fine.t).abs() > tol_t {
        return Err(Error::MisalignedRuns(format!(
            "comparison times differ: {}, {}, {}",
            coarse.t, medium.t, fine.t
        )));
    }
    let (gc, gm, gf) = (coarse.field.grid(), medium.field.grid(), fine.field.grid());
    if gc.dim() != gm.dim() || gm.dim() != gf.dim() || gc.b() != gm.b() || gm.b() != gf.b() {
        return Err(Error::MisalignedRuns("grids cover different domains".into()));
    }
    let (c, m, f) = match axis {
        RefineAxis::Space => {
            if gm.n() - 1 != 2 * (gc.n() - 1) || gf.n() - 1 != 4 * (gc.n() - 1) {
                return Err(Error::MisalignedRuns(format!(
                    "space ladder needs N-1 doubling, got {}, {}, {}",
                    gc.n(),
                    gm.n(),
                    gf.n()
                )));
            }
            (
                coarse.field.values().to_vec(),
                restrict(medium.field, 2),
                restrict(fine.field, 4),
            )
        }
        RefineAxis::Time => {
            if gc != gm || gm != gf {
                return Err(Error::MisalignedRuns("time ladder needs identical grids".into()));
            }
            (
                coarse.field.values().to_vec(),
                medium.field.values().to_vec(),
                fine.field.values().to_vec(),
            )
        }
    };
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let (e_cm, e_mf) = (diff(&c, &m), diff(&m, &f));
    if e_mf == 0.0 || e_cm == 0.0 {
        return Err(Error::MisalignedRuns(
            "successive differences vanish; order undefined".into(),
        ));
    }
    Ok((e_cm / e_mf).log2())
}

/// Report entry for a measured order against its accepted range.
pub fn order_report(name: &str, order: f64, lo: f64, hi: f64, t: f64) -> CheckReport {
    let slack = (order - lo).min(hi - order);
    CheckReport::from_slack(
        name,
        slack,
        t,
        0.0,
        format!("measured order {order:.4}, accepted [{lo}, {hi}]"),
    )
}

/// Power law `||u(t)||_k ~ A t^p` fitted on a log-log scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Fits the short-time decay of the recorded `lk_norm` column over
/// `t_a <= t <= t_b` (`t_a > 0`). Informational: the smoothing estimates
/// behind it carry unknown constants, so nothing is asserted on the result.
pub fn fit_norm_exponent(series: &MassSeries, window: (f64, f64)) -> Result<PowerFit> {
    let (t_a, t_b) = window;
    if !(t_a > 0.0) || !(t_b > t_a) {
        return Err(Error::ValidationError(format!("bad window [{t_a}, {t_b}]")));
    }
    let pts: Vec<(f64, f64)> = series
        .records()
        .iter()
        .filter(|r| r.t >= t_a && r.t <= t_b && r.lk_norm > 0.0)
        .map(|r| (r.t.ln(), r.lk_norm.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} samples in window [{t_a}, {t_b}], need at least 5",
            pts.len()
        )));
    }
    let line = line_fit(&pts)?;
    Ok(PowerFit {
        exponent: line.slope,
        prefactor: line.intercept.exp(),
        r_squared: line.r_squared,
        samples: pts.len(),
    })
}
