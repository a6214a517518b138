use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which right-hand side the steppers integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// `u_t = Δu + u^α (1 - ∫u)`.
    NonlocalKpp,
    /// `u_t = Δu`, the reaction fields are identically zero.
    Heat,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::NonlocalKpp => "nonlocal-kpp",
            Mode::Heat => "heat",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "nonlocal-kpp" | "kpp" => Ok(Mode::NonlocalKpp),
            "heat" => Ok(Mode::Heat),
            other => Err(format!("unknown mode `{other}` (expected nonlocal-kpp or heat)")),
        }
    }
}

/// A finer time step used until `until`, for stiff initial transients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartupPhase {
    pub tau: f64,
    pub until: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub alpha: f64,
    pub tau: f64,
    pub t_final: f64,
    pub mode: Mode,
    pub record_every: usize,
    pub blowup_threshold: f64,
    pub startup: Option<StartupPhase>,
}

impl SimParams {
    pub fn new(alpha: f64, tau: f64, t_final: f64, mode: Mode) -> Self {
        Self {
            alpha,
            tau,
            t_final,
            mode,
            record_every: 1,
            blowup_threshold: 1e8,
            startup: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ValidationError(msg));
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be > 0, got {}", self.tau));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be > 0, got {}", self.t_final));
        }
        if !(self.blowup_threshold > 0.0) {
            return bad(format!("blowup_threshold must be > 0, got {}", self.blowup_threshold));
        }
        if self.record_every == 0 {
            return bad("record_every must be >= 1".into());
        }
        if let Some(s) = self.startup {
            if !(s.tau > 0.0 && s.tau.is_finite()) || !(s.until > 0.0 && s.until.is_finite()) {
                return bad(format!("startup phase needs tau > 0 and until > 0, got {s:?}"));
            }
        }
        Ok(())
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self { tau, ..*self }
    }
}

/// Step schedule: uniform steps of `tau` from `t0`, the last one truncated so
/// the schedule lands exactly on `t1`. Times are computed as `t0 + k * tau`
/// rather than accumulated.
#[derive(Debug, Clone)]
pub(crate) struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub tau: f64,
    pub steps: usize,
}

impl Segment {
    pub fn new(t0: f64, t1: f64, tau: f64) -> Self {
        let span = t1 - t0;
        let steps = if span <= 0.0 {
            0
        } else {
            // A trailing sliver below 1e-9 tau is absorbed into the last step.
            (span / tau - 1e-9).ceil().max(1.0) as usize
        };
        Self { t0, t1, tau, steps }
    }

    /// Time after the `k`-th step (1-based).
    pub fn time_after(&self, k: usize) -> f64 {
        if k >= self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.tau
        }
    }
}

pub(crate) fn schedule(params: &SimParams) -> Vec<Segment> {
    let mut segments = Vec::new();
    let mut start = 0.0;
    if let Some(s) = params.startup {
        let until = s.until.min(params.t_final);
        segments.push(Segment::new(0.0, until, s.tau));
        start = until;
    }
    segments.push(Segment::new(start, params.t_final, params.tau));
    segments.retain(|s| s.steps > 0);
    segments
}
