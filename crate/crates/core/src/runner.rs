//! Orchestration behind the command-line verbs: run a configuration, write
//! its outputs, evaluate the configured checks.

use std::path::Path;

use log::info;

use crate::checks::{
    blowup_report, check_mass_bounds, check_mass_decay, check_mass_monotone, check_mass_ode_residual, estimate_order,
    ode_tolerance, order_report, CheckReport, RefineAxis, Sample,
};
use crate::config::{CheckKind, Checks, RunConfig};
use crate::error::{Error, Result};
use crate::functionals::mass;
use crate::heat_compare::{default_window, fit_exponential, run_pair_fields, DecaySeries, ExpFit};
use crate::initial::{build_field, InitialConditionSpec};
use crate::io;
use crate::series::MassSeries;
use crate::sim::{default_lk_order, run_with, RunOutcome, RunStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;

/// Accepted range of the measured spatial order.
pub const SPACE_ORDER_RANGE: (f64, f64) = (1.7, 2.3);
/// Minimum measured temporal order.
pub const TIME_ORDER_MIN: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outcome: RunOutcome,
    pub reports: Vec<CheckReport>,
    pub exit_code: i32,
}

/// Intended initial mass if configured, else the discrete one.
fn target_m0(cfg: &RunConfig, series: &MassSeries) -> Result<f64> {
    match cfg.m0 {
        Some(m0) => Ok(m0),
        None => series.first().map(|r| r.mass).ok_or(Error::EmptySeries),
    }
}

pub fn series_checks(
    series: &MassSeries,
    enabled: &[CheckKind],
    checks: &Checks,
    m0: f64,
    alpha: f64,
    tau: f64,
) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for kind in enabled {
        match kind {
            CheckKind::MassBounds => out.push(check_mass_bounds(series, m0, checks.bounds_tol)?),
            CheckKind::MassDecay => out.push(check_mass_decay(series, m0, alpha, checks.slack_factor)?),
            CheckKind::MassOde => {
                let tol = checks.ode_tol.unwrap_or_else(|| ode_tolerance(tau));
                out.push(check_mass_ode_residual(series, tol)?)
            }
            CheckKind::MassMonotone => out.push(check_mass_monotone(
                series,
                m0,
                checks.monotone_slack,
                checks.monotone_band,
            )?),
            CheckKind::Global => {}
        }
    }
    Ok(out)
}

pub fn evaluate_checks(cfg: &RunConfig, outcome: &RunOutcome) -> Result<Vec<CheckReport>> {
    let m0 = target_m0(cfg, &outcome.series)?;
    let mut reports = series_checks(
        &outcome.series,
        &cfg.checks.enabled,
        &cfg.checks,
        m0,
        cfg.params.alpha,
        cfg.params.tau,
    )?;
    if cfg.checks.enabled.contains(&CheckKind::Global) {
        reports.push(blowup_report(outcome));
    }
    Ok(reports)
}

/// Runs the solver loop and returns the outcome; writes snapshots on the way.
pub fn simulate(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let u0 = cfg.initial_field()?;
    let lk = cfg
        .outputs
        .lk_order
        .unwrap_or_else(|| default_lk_order(cfg.params.alpha));
    let mut pending: Vec<f64> = cfg.outputs.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.dedup();
    let snapshot_dir = cfg.outputs.snapshot_dir.clone();
    run_with(u0, cfg.params, lk, |t, u, _| {
        while let Some(&next) = pending.first() {
            if t + 1e-12 * next.max(1.0) < next {
                break;
            }
            io::write_snapshot(&snapshot_dir.join(format!("u_t{next}.csv")), u)?;
            pending.remove(0);
        }
        Ok(())
    })
}

/// `run <config>`: simulate, write `series.csv`, snapshots and the check
/// report. Exit code 0 iff the run completed and every check passed.
pub fn run_main(cfg: &RunConfig) -> Result<RunSummary> {
    let outcome = simulate(cfg)?;
    io::write_series(&cfg.outputs.series_path, &outcome.series)?;
    let reports = evaluate_checks(cfg, &outcome)?;
    io::write_report(&cfg.outputs.report_path, &reports)?;
    for r in &reports {
        info!(
            "{} passed={} worst_slack={:e} at t={}",
            r.check_name, r.passed, r.worst_slack, r.location_t
        );
    }
    let exit_code = match outcome.status {
        RunStatus::Blowup { .. } => EXIT_BLOWUP,
        RunStatus::Completed if reports.iter().all(|r| r.passed) => EXIT_OK,
        RunStatus::Completed => EXIT_ERROR,
    };
    Ok(RunSummary {
        outcome,
        reports,
        exit_code,
    })
}

/// Exit status for a finished or failed `run_main`.
pub fn exit_status(result: &Result<RunSummary>) -> i32 {
    match result {
        Ok(s) => s.exit_code,
        Err(Error::BlowupDetected { .. }) => EXIT_BLOWUP,
        Err(_) => EXIT_ERROR,
    }
}

#[derive(Debug, Clone)]
pub struct HeatComparison {
    pub series: DecaySeries,
    pub fit: ExpFit,
    pub window: (f64, f64),
    pub report: CheckReport,
}

/// Verdict on the decay fit: positive rate and a log-linear fit.
pub fn decay_fit_report(fit: &ExpFit, window: (f64, f64)) -> CheckReport {
    let passed = fit.c2 > 0.0 && fit.r_squared > 0.99;
    CheckReport {
        check_name: "heat_decay".into(),
        passed,
        worst_slack: fit.c2.min(fit.r_squared - 0.99),
        location_t: window.1,
        details: format!(
            "fit over [{}, {}]: C1 = {:e}, C2 = {}, r^2 = {}, {} samples",
            window.0, window.1, fit.c1, fit.c2, fit.r_squared, fit.samples
        ),
    }
}

/// `compare-heat <config>`: `u` from the configured data, `v` the heat
/// solution started from the constant with the same mass.
pub fn compare_heat(cfg: &RunConfig) -> Result<HeatComparison> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let u0 = cfg.initial_field()?;
    let level = mass(&u0) / grid.b().powi(grid.dim() as i32);
    let v0 = build_field(&InitialConditionSpec::Constant { value: level }, grid)?;
    let series = run_pair_fields(u0, v0, cfg.params)?;
    io::write_decay(&cfg.outputs.decay_path, &series)?;
    let window = default_window(cfg.params.t_final);
    let fit = fit_exponential(&series, window)?;
    let report = decay_fit_report(&fit, window);
    io::write_report(&cfg.outputs.report_path, std::slice::from_ref(&report))?;
    Ok(HeatComparison {
        series,
        fit,
        window,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct Convergence {
    pub order: f64,
    pub levels: Vec<RunOutcome>,
    pub report: CheckReport,
}

/// The three configurations of a refinement ladder, coarsest first.
pub fn ladder(cfg: &RunConfig, axis: RefineAxis) -> Vec<RunConfig> {
    (0..3)
        .map(|level| {
            let f = (1u32 << level) as f64;
            let mut c = cfg.clone();
            match axis {
                RefineAxis::Space => c.h = cfg.h / f,
                RefineAxis::Time => {
                    c.params.tau = cfg.params.tau / f;
                    if let Some(st) = c.params.startup.as_mut() {
                        st.tau /= f;
                    }
                }
            }
            // Only the final state is compared.
            c.params.record_every = usize::MAX;
            c.outputs.snapshot_times.clear();
            c
        })
        .collect()
}

/// `converge <config> --axis space|time`.
pub fn converge(cfg: &RunConfig, axis: RefineAxis) -> Result<Convergence> {
    if matches!(cfg.ic, InitialConditionSpec::FromFile { .. }) && axis == RefineAxis::Space {
        return Err(Error::ValidationError(
            "space refinement needs closed-form initial data".into(),
        ));
    }
    let levels = ladder(cfg, axis)
        .iter()
        .map(|c| {
            let out = simulate(c)?;
            match out.status {
                RunStatus::Completed => Ok(out),
                RunStatus::Blowup { t, max_u } => Err(Error::BlowupDetected { t, max_u }),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let order = estimate_order(
        Sample::from(&levels[0]),
        Sample::from(&levels[1]),
        Sample::from(&levels[2]),
        axis,
    )?;
    let report = match axis {
        RefineAxis::Space => order_report(
            "spatial_order",
            order,
            SPACE_ORDER_RANGE.0,
            SPACE_ORDER_RANGE.1,
            levels[0].final_t,
        ),
        RefineAxis::Time => order_report(
            "temporal_order",
            order,
            TIME_ORDER_MIN,
            f64::INFINITY,
            levels[0].final_t,
        ),
    };
    io::write_report(&cfg.outputs.report_path, std::slice::from_ref(&report))?;
    Ok(Convergence { order, levels, report })
}

/// `check <series.csv>`: mass-law checks on a stored series.
pub fn check_series_file(
    path: &Path,
    m0: f64,
    alpha: f64,
    tau: Option<f64>,
    checks: &Checks,
) -> Result<Vec<CheckReport>> {
    let series = io::read_series(path, default_lk_order(alpha))?;
    let tau = match tau {
        Some(t) => t,
        None => series
            .records()
            .windows(2)
            .map(|w| w[1].t - w[0].t)
            .fold(f64::INFINITY, f64::min),
    };
    let enabled = [
        CheckKind::MassBounds,
        CheckKind::MassDecay,
        CheckKind::MassOde,
        CheckKind::MassMonotone,
    ];
    series_checks(
        &series,
        &enabled,
        checks,
        m0,
        alpha,
        if tau.is_finite() { tau } else { 0.0 },
    )
}
