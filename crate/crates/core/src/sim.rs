//! Time-stepping loop shared by every run: schedule, records, blow-up
//! surveillance.

use crate::adi2d::{adi_step, AdiStepReport};
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::params::{schedule, Segment, SimParams};
use crate::series::{MassRecord, MassSeries};
use crate::solver1d::cn1d_step_report;

/// Advances `u` by `params.tau` with the stepper matching its dimension.
pub fn step_field(u: &ScalarField, params: &SimParams) -> Result<AdiStepReport> {
    match u.grid().dim() {
        1 => cn1d_step_report(u, params),
        _ => adi_step(u, params),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    Blowup { t: f64, max_u: f64 },
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub series: MassSeries,
    pub final_field: ScalarField,
    pub final_t: f64,
    pub t_final: f64,
    pub blowup_threshold: f64,
    pub status: RunStatus,
    pub steps: usize,
    pub min_dominance_margin: f64,
    pub negativity_seen: bool,
}

/// Stepwise driver. Each call to [`Simulation::advance`] takes one step.
pub struct Simulation {
    params: SimParams,
    field: ScalarField,
    t: f64,
    segments: Vec<Segment>,
    segment: usize,
    k: usize,
    steps: usize,
    min_margin: f64,
}

impl Simulation {
    pub fn new(u0: ScalarField, params: SimParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            segments: schedule(&params),
            params,
            field: u0,
            t: 0.0,
            segment: 0,
            k: 0,
            steps: 0,
            min_margin: f64::INFINITY,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.segment >= self.segments.len()
    }

    pub fn min_dominance_margin(&self) -> f64 {
        self.min_margin
    }

    /// Takes one step. Returns `Ok(false)` once the horizon has been reached.
    pub fn advance(&mut self) -> Result<bool> {
        let Some(seg) = self.segments.get(self.segment) else {
            return Ok(false);
        };
        let t_next = seg.time_after(self.k + 1);
        let step = self.params.with_tau(t_next - self.t);
        let report = step_field(&self.field, &step).map_err(|e| match e {
            Error::BlowupDetected { max_u, .. } => Error::BlowupDetected { t: t_next, max_u },
            other => other,
        })?;
        self.min_margin = self.min_margin.min(report.dominance_margin);
        self.field = report.new_field;
        self.t = t_next;
        self.steps += 1;
        self.k += 1;
        if self.k >= seg.steps {
            self.segment += 1;
            self.k = 0;
        }
        Ok(true)
    }
}

/// Order of the `lk_norm` diagnostic when none is configured.
pub fn default_lk_order(alpha: f64) -> f64 {
    alpha.max(1.0)
}

/// Runs to the horizon, recording diagnostics at `t = 0`, every
/// `record_every` steps and at the final time. `observe` sees the field after
/// every step, with a flag telling whether the step was recorded.
pub fn run_with(
    u0: ScalarField,
    params: SimParams,
    lk_order: f64,
    mut observe: impl FnMut(f64, &ScalarField, bool) -> Result<()>,
) -> Result<RunOutcome> {
    let mut sim = Simulation::new(u0, params)?;
    let mut series = MassSeries::new(lk_order);
    let mut negativity_seen = sim.field().min() < 0.0;
    series.push(MassRecord::measure(0.0, sim.field(), params.alpha, lk_order)?)?;
    observe(0.0, sim.field(), true)?;
    let mut status = RunStatus::Completed;
    loop {
        match sim.advance() {
            Ok(false) => break,
            Ok(true) => {}
            Err(Error::BlowupDetected { t, max_u }) => {
                status = RunStatus::Blowup { t, max_u };
                break;
            }
            Err(e) => return Err(e),
        }
        negativity_seen |= sim.field().min() < 0.0;
        let record = sim.steps() % params.record_every == 0 || sim.is_done();
        if record {
            series.push(MassRecord::measure(sim.t(), sim.field(), params.alpha, lk_order)?)?;
        }
        observe(sim.t(), sim.field(), record)?;
    }
    Ok(RunOutcome {
        final_t: sim.t(),
        t_final: params.t_final,
        blowup_threshold: params.blowup_threshold,
        steps: sim.steps(),
        min_dominance_margin: sim.min_dominance_margin(),
        final_field: sim.field,
        series,
        status,
        negativity_seen,
    })
}

pub fn run(u0: ScalarField, params: SimParams) -> Result<RunOutcome> {
    run_with(u0, params, default_lk_order(params.alpha), |_, _, _| Ok(()))
}
