//! Run configuration: a flat `key = value` format with `#` comments and
//! dotted keys, plus the catalogue of preset experiments.
//!
//! ```text
//! grid.dim = 2
//! grid.b = 1
//! grid.h = 0.015625
//! params.alpha = 1.5
//! ic.kind = poly-product
//! ic.c_x = 0.5
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::grid::{build_grid, GridSpec, ScalarField};
use crate::initial::{build_field, InitialConditionSpec};
use crate::params::{Mode, SimParams, StartupPhase};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    MassBounds,
    MassDecay,
    MassOde,
    MassMonotone,
    Global,
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::MassBounds => "mass_bounds",
            CheckKind::MassDecay => "mass_decay",
            CheckKind::MassOde => "mass_ode",
            CheckKind::MassMonotone => "mass_monotone",
            CheckKind::Global => "global",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "mass_bounds" => CheckKind::MassBounds,
            "mass_decay" => CheckKind::MassDecay,
            "mass_ode" => CheckKind::MassOde,
            "mass_monotone" => CheckKind::MassMonotone,
            "global" => CheckKind::Global,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub series_path: PathBuf,
    pub report_path: PathBuf,
    pub decay_path: PathBuf,
    pub snapshot_dir: PathBuf,
    pub snapshot_times: Vec<f64>,
    /// Order of the `lk_norm` column; defaults to `max(alpha, 1)`.
    pub lk_order: Option<f64>,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            series_path: "series.csv".into(),
            report_path: "report.json".into(),
            decay_path: "decay.csv".into(),
            snapshot_dir: ".".into(),
            snapshot_times: Vec::new(),
            lk_order: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checks {
    pub enabled: Vec<CheckKind>,
    pub bounds_tol: f64,
    pub slack_factor: f64,
    /// Absolute tolerance of the mass-ODE residual; defaults to `max(1e-2, 10 tau)`.
    pub ode_tol: Option<f64>,
    /// Allowed per-record move against the expected direction of the mass.
    pub monotone_slack: f64,
    /// Monotonicity is only asserted while `|1 - m| >= monotone_band`.
    pub monotone_band: f64,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            enabled: Vec::new(),
            bounds_tol: 1e-3,
            slack_factor: 1.1,
            ode_tol: None,
            monotone_slack: 1e-6,
            monotone_band: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub b: f64,
    pub h: f64,
    pub params: SimParams,
    pub ic: InitialConditionSpec,
    /// Intended initial mass, used by the decay envelope.
    pub m0: Option<f64>,
    pub outputs: Outputs,
    pub checks: Checks,
}

impl RunConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        build_grid(self.dim, self.b, self.h)
    }

    /// Initial field; rejects negative data in nonlocal mode.
    pub fn initial_field(&self) -> Result<ScalarField> {
        let u0 = build_field(&self.ic, self.grid()?)?;
        if self.params.mode == Mode::NonlocalKpp && u0.min() < 0.0 {
            return Err(Error::ValidationError(format!(
                "initial data must be nonnegative in nonlocal mode (min {})",
                u0.min()
            )));
        }
        Ok(u0)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.grid()?;
        if let Some(&t) = self
            .outputs
            .snapshot_times
            .iter()
            .find(|&&t| !(0.0..=self.params.t_final).contains(&t))
        {
            return Err(Error::ValidationError(format!(
                "snapshot time {t} outside [0, {}]",
                self.params.t_final
            )));
        }
        if let Some(k) = self.outputs.lk_order {
            if !(k >= 1.0) {
                return Err(Error::ValidationError(format!("lk_order must be >= 1, got {k}")));
            }
        }
        let c = &self.checks;
        if !(c.bounds_tol >= 0.0) || !(c.slack_factor > 0.0) || !(c.monotone_slack >= 0.0) || !(c.monotone_band >= 0.0)
        {
            return Err(Error::ValidationError("check tolerances must be nonnegative".into()));
        }
        if let Some(m0) = self.m0 {
            if !(m0 > 0.0) {
                return Err(Error::ValidationError(format!("m0 must be > 0, got {m0}")));
            }
        }
        match self.ic {
            InitialConditionSpec::CharacteristicBlock { side, height, .. } if !(side > 0.0 && height >= 0.0) => {
                Err(Error::ValidationError("block needs side > 0 and height >= 0".into()))
            }
            InitialConditionSpec::Constant { value } if self.params.mode == Mode::NonlocalKpp && value < 0.0 => {
                Err(Error::ValidationError("constant initial value must be >= 0".into()))
            }
            InitialConditionSpec::HeatEigenmode { amplitude, mean }
                if self.params.mode == Mode::NonlocalKpp && mean - amplitude.abs() < 0.0 =>
            {
                Err(Error::ValidationError(
                    "eigenmode must stay nonnegative in nonlocal mode".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Canonical text form; `parse_config` of the output gives back `self`.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("grid.dim", self.dim.to_string());
        kv("grid.b", self.b.to_string());
        kv("grid.h", self.h.to_string());
        let p = &self.params;
        kv("params.alpha", p.alpha.to_string());
        kv("params.tau", p.tau.to_string());
        kv("params.t_final", p.t_final.to_string());
        kv("params.mode", p.mode.to_string());
        kv("params.record_every", p.record_every.to_string());
        kv("params.blowup_threshold", p.blowup_threshold.to_string());
        if let Some(st) = p.startup {
            kv("params.startup_tau", st.tau.to_string());
            kv("params.startup_until", st.until.to_string());
        }
        match &self.ic {
            InitialConditionSpec::PolyProduct { c_x, c_y } => {
                kv("ic.kind", "poly-product".into());
                kv("ic.c_x", c_x.to_string());
                kv("ic.c_y", c_y.to_string());
            }
            InitialConditionSpec::CharacteristicBlock { x_lo, side, height } => {
                kv("ic.kind", "block".into());
                kv("ic.x_lo", x_lo.to_string());
                kv("ic.side", side.to_string());
                kv("ic.height", height.to_string());
            }
            InitialConditionSpec::Constant { value } => {
                kv("ic.kind", "constant".into());
                kv("ic.value", value.to_string());
            }
            InitialConditionSpec::HeatEigenmode { amplitude, mean } => {
                kv("ic.kind", "heat-eigenmode".into());
                kv("ic.amplitude", amplitude.to_string());
                kv("ic.mean", mean.to_string());
            }
            InitialConditionSpec::FromFile { path } => {
                kv("ic.kind", "file".into());
                kv("ic.path", path.display().to_string());
            }
        }
        if let Some(m0) = self.m0 {
            kv("ic.m0", m0.to_string());
        }
        let o = &self.outputs;
        kv("outputs.series", o.series_path.display().to_string());
        kv("outputs.report", o.report_path.display().to_string());
        kv("outputs.decay", o.decay_path.display().to_string());
        kv("outputs.snapshot_dir", o.snapshot_dir.display().to_string());
        if !o.snapshot_times.is_empty() {
            let times: Vec<String> = o.snapshot_times.iter().map(|t| t.to_string()).collect();
            kv("outputs.snapshot_times", times.join(", "));
        }
        if let Some(k) = o.lk_order {
            kv("outputs.lk_order", k.to_string());
        }
        let c = &self.checks;
        let names: Vec<&str> = c.enabled.iter().map(|k| k.name()).collect();
        kv("checks.enabled", names.join(", "));
        kv("checks.bounds_tol", c.bounds_tol.to_string());
        kv("checks.slack_factor", c.slack_factor.to_string());
        if let Some(t) = c.ode_tol {
            kv("checks.ode_tol", t.to_string());
        }
        kv("checks.monotone_slack", c.monotone_slack.to_string());
        kv("checks.monotone_band", c.monotone_band.to_string());
        s
    }

    /// Applies `key = value` overrides on top of this configuration.
    pub fn with_overrides<'a>(&self, overrides: impl IntoIterator<Item = &'a str>) -> Result<RunConfig> {
        let mut entries = collect_entries(&self.to_config_string())?;
        let overrides = overrides.into_iter().map(split_override).collect::<Result<Vec<_>>>()?;
        let touches = |key: &str| overrides.iter().any(|(k, _)| k == key);
        if touches("params.t_final") && !touches("outputs.snapshot_times") {
            // Keep inherited snapshot times that still fit the new horizon.
            entries.remove("outputs.snapshot_times");
            if let Some(t_final) = overrides
                .iter()
                .rev()
                .find(|(k, _)| k == "params.t_final")
                .and_then(|(_, v)| v.parse::<f64>().ok())
            {
                let kept: Vec<String> = self
                    .outputs
                    .snapshot_times
                    .iter()
                    .filter(|&&t| t <= t_final)
                    .map(|t| t.to_string())
                    .collect();
                if !kept.is_empty() {
                    entries.insert("outputs.snapshot_times".into(), (kept.join(", "), 0));
                }
            }
        }
        // The base text uses keys of the current ic kind; switching kind drops them.
        for (k, v) in overrides {
            if k == "ic.kind" {
                entries.retain(|key, _| !key.starts_with("ic.") || key == "ic.m0");
            }
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(Error::ValidationError(format!("unknown key `{k}`")));
            }
            entries.insert(k, (v, 0));
        }
        from_entries(entries)
    }
}

fn split_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::ValidationError(format!("override `{s}` is not key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

const KNOWN_KEYS: &[&str] = &[
    "grid.dim",
    "grid.b",
    "grid.h",
    "params.alpha",
    "params.tau",
    "params.t_final",
    "params.mode",
    "params.record_every",
    "params.blowup_threshold",
    "params.startup_tau",
    "params.startup_until",
    "ic.kind",
    "ic.c_x",
    "ic.c_y",
    "ic.x_lo",
    "ic.side",
    "ic.height",
    "ic.value",
    "ic.amplitude",
    "ic.mean",
    "ic.path",
    "ic.m0",
    "outputs.series",
    "outputs.report",
    "outputs.decay",
    "outputs.snapshot_dir",
    "outputs.snapshot_times",
    "outputs.lk_order",
    "checks.enabled",
    "checks.bounds_tol",
    "checks.slack_factor",
    "checks.ode_tol",
    "checks.monotone_slack",
    "checks.monotone_band",
];

type Entries = BTreeMap<String, (String, usize)>;

fn collect_entries(text: &str) -> Result<Entries> {
    let mut entries = Entries::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::ParseError {
            line: line_no,
            reason: format!("expected `key = value`, got `{line}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::ParseError {
                line: line_no,
                reason: "empty key".into(),
            });
        }
        if !KNOWN_KEYS.contains(&k) {
            return Err(Error::ParseError {
                line: line_no,
                reason: format!("unknown key `{k}`"),
            });
        }
        if let Some((_, first)) = entries.get(k) {
            return Err(Error::ParseError {
                line: line_no,
                reason: format!("duplicate key `{k}` (first set on line {first})"),
            });
        }
        entries.insert(k.to_string(), (v.to_string(), line_no));
    }
    Ok(entries)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    from_entries(collect_entries(text)?)
}

struct Reader {
    entries: Entries,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|e| Error::ParseError {
                line,
                reason: format!("`{key}`: cannot parse `{v}`: {e}"),
            }),
        }
    }

    fn required<T: std::str::FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?
            .ok_or_else(|| Error::ValidationError(format!("missing required key `{key}`")))
    }

    fn list<T>(&mut self, key: &str, item: impl Fn(&str) -> Option<T>) -> Result<Option<Vec<T>>> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    item(s).ok_or_else(|| Error::ParseError {
                        line,
                        reason: format!("`{key}`: bad entry `{s}`"),
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }
}

fn from_entries(entries: Entries) -> Result<RunConfig> {
    let mut r = Reader { entries };
    let dim: usize = r.parse("grid.dim")?.unwrap_or(2);
    let b: f64 = r.parse("grid.b")?.unwrap_or(1.0);
    let h: f64 = r.required("grid.h")?;

    let mode: Mode = r.parse("params.mode")?.unwrap_or(Mode::NonlocalKpp);
    let mut params = SimParams::new(
        r.required("params.alpha")?,
        r.required("params.tau")?,
        r.required("params.t_final")?,
        mode,
    );
    if let Some(k) = r.parse("params.record_every")? {
        params.record_every = k;
    }
    if let Some(t) = r.parse("params.blowup_threshold")? {
        params.blowup_threshold = t;
    }
    params.startup = match (
        r.parse::<f64>("params.startup_tau")?,
        r.parse::<f64>("params.startup_until")?,
    ) {
        (Some(tau), Some(until)) => Some(StartupPhase { tau, until }),
        (None, None) => None,
        _ => {
            return Err(Error::ValidationError(
                "params.startup_tau and params.startup_until go together".into(),
            ))
        }
    };

    let kind: String = r.required("ic.kind")?;
    let ic = match kind.as_str() {
        "poly-product" => InitialConditionSpec::PolyProduct {
            c_x: r.parse("ic.c_x")?.unwrap_or(0.0),
            c_y: r.parse("ic.c_y")?.unwrap_or(0.0),
        },
        "block" => InitialConditionSpec::CharacteristicBlock {
            x_lo: r.required("ic.x_lo")?,
            side: r.required("ic.side")?,
            height: r.required("ic.height")?,
        },
        "constant" => InitialConditionSpec::Constant {
            value: r.required("ic.value")?,
        },
        "heat-eigenmode" => InitialConditionSpec::HeatEigenmode {
            amplitude: r.required("ic.amplitude")?,
            mean: r.parse("ic.mean")?.unwrap_or(1.0),
        },
        "file" => InitialConditionSpec::FromFile {
            path: r.required::<String>("ic.path")?.into(),
        },
        other => return Err(Error::ValidationError(format!("unknown ic.kind `{other}`"))),
    };
    let m0 = r.parse("ic.m0")?;

    let mut outputs = Outputs::default();
    if let Some(p) = r.parse::<String>("outputs.series")? {
        outputs.series_path = p.into();
    }
    if let Some(p) = r.parse::<String>("outputs.report")? {
        outputs.report_path = p.into();
    }
    if let Some(p) = r.parse::<String>("outputs.decay")? {
        outputs.decay_path = p.into();
    }
    if let Some(p) = r.parse::<String>("outputs.snapshot_dir")? {
        outputs.snapshot_dir = p.into();
    }
    if let Some(ts) = r.list("outputs.snapshot_times", |s| s.parse::<f64>().ok())? {
        outputs.snapshot_times = ts;
    }
    outputs.lk_order = r.parse("outputs.lk_order")?;

    let mut checks = Checks::default();
    if let Some(list) = r.list("checks.enabled", CheckKind::parse)? {
        checks.enabled = list;
    }
    if let Some(v) = r.parse("checks.bounds_tol")? {
        checks.bounds_tol = v;
    }
    if let Some(v) = r.parse("checks.slack_factor")? {
        checks.slack_factor = v;
    }
    checks.ode_tol = r.parse("checks.ode_tol")?;
    if let Some(v) = r.parse("checks.monotone_slack")? {
        checks.monotone_slack = v;
    }
    if let Some(v) = r.parse("checks.monotone_band")? {
        checks.monotone_band = v;
    }

    if let Some((k, (_, line))) = r.entries.into_iter().next() {
        return Err(Error::ParseError {
            line,
            reason: format!("`{k}` does not apply to ic.kind = {kind}"),
        });
    }

    let cfg = RunConfig {
        dim,
        b,
        h,
        params,
        ic,
        m0,
        outputs,
        checks,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub const PRESETS: &[&str] = &["case1", "case1b", "case2", "case3"];

/// The four experiments on the unit domain.
pub fn preset(name: &str) -> Result<RunConfig> {
    use CheckKind::*;
    let smooth_checks = vec![MassBounds, MassDecay, MassOde, MassMonotone, Global];
    let h64 = 1.0 / 64.0;
    let base = |dim: usize, h: f64, alpha: f64, t_final: f64, ic: InitialConditionSpec, m0: f64| RunConfig {
        dim,
        b: 1.0,
        h,
        params: SimParams::new(alpha, 1e-3, t_final, Mode::NonlocalKpp),
        ic,
        m0: Some(m0),
        outputs: Outputs::default(),
        checks: Checks {
            enabled: smooth_checks.clone(),
            ..Checks::default()
        },
    };
    let cfg = match name {
        "case1" => {
            let mut c = base(
                2,
                h64,
                1.5,
                20.0,
                InitialConditionSpec::PolyProduct { c_x: 0.5, c_y: 0.0 },
                0.5,
            );
            c.outputs.snapshot_times = vec![0.5, 2.0, 7.0];
            c
        }
        "case1b" => {
            let mut c = base(
                2,
                h64,
                1.5,
                20.0,
                InitialConditionSpec::PolyProduct { c_x: 1.0, c_y: 1.0 },
                2.25,
            );
            c.outputs.snapshot_times = vec![0.5, 2.0, 7.0];
            c
        }
        "case2" => {
            let h = 0.01;
            let ic = InitialConditionSpec::CharacteristicBlock {
                x_lo: 0.3,
                side: 5.0 * h,
                height: 1.0 / (40.0 * h * h),
            };
            let mut c = base(2, h, 3.0, 10.0, ic, 0.625);
            // tau * int u0^3 ~ 0.08: a coarser start overshoots the unit mass.
            c.params.startup = Some(StartupPhase { tau: 2e-6, until: 1e-3 });
            c.outputs.snapshot_times = vec![0.0, 1e-4, 1.0];
            c.checks.enabled = vec![MassBounds, MassDecay, Global];
            c
        }
        "case3" => {
            let ic = InitialConditionSpec::CharacteristicBlock {
                x_lo: 0.3,
                side: 0.05,
                height: 10.0,
            };
            let mut c = base(1, 0.01, 2.0, 20.0, ic, 0.5);
            // The block spreads on a time scale of about width^2 = 2.5e-3;
            // resolve it so the recorded mass derivative is meaningful.
            c.params.startup = Some(StartupPhase { tau: 1e-5, until: 1e-2 });
            c.outputs.snapshot_times = vec![0.0, 0.1, 1.0, 5.0];
            c
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    cfg.validate()?;
    Ok(cfg)
}
