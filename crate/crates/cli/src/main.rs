//! Command-line front end for the nonlocal Fisher–KPP simulator.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use nlkpp_core::checks::{CheckReport, RefineAxis};
use nlkpp_core::config::{parse_config, preset, Checks, RunConfig, PRESETS};
use nlkpp_core::runner::{self, EXIT_BLOWUP, EXIT_ERROR, EXIT_OK};
use nlkpp_core::sim::RunStatus;
use nlkpp_core::Error;

#[derive(Parser, Debug)]
#[command(name = "nlkpp", version, about = "Nonlocal Fisher-KPP finite-difference simulator")]
struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a configuration file and evaluate its checks.
    Run { config: PathBuf },
    /// Run a built-in case, optionally overriding keys.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
        name: String,
        /// `key=value` override; may be repeated.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Print the resolved configuration instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// Distance between the solution and the heat flow of the same mass.
    CompareHeat { config: PathBuf },
    /// Observed order of convergence from a three-level refinement ladder.
    Converge {
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
    },
    /// Mass-law checks on a stored series.
    Check {
        series: PathBuf,
        #[arg(long)]
        m0: f64,
        #[arg(long)]
        alpha: f64,
        /// Time step of the run; defaults to the smallest record spacing.
        #[arg(long)]
        tau: Option<f64>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Axis {
    Space,
    Time,
}

impl From<Axis> for RefineAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::Space => RefineAxis::Space,
            Axis::Time => RefineAxis::Time,
        }
    }
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("parsing {}", path.display()))
}

fn rebase(path: &mut PathBuf, dir: &Path) {
    if path.is_relative() {
        *path = dir.join(&*path);
    }
}

fn rebase_outputs(mut cfg: RunConfig, dir: Option<&Path>) -> RunConfig {
    if let Some(dir) = dir {
        let o = &mut cfg.outputs;
        rebase(&mut o.series_path, dir);
        rebase(&mut o.report_path, dir);
        rebase(&mut o.decay_path, dir);
        rebase(&mut o.snapshot_dir, dir);
    }
    cfg
}

fn print_reports(reports: &[CheckReport]) {
    for r in reports {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {}: slack {:e} at t = {} ({})",
            r.check_name, r.worst_slack, r.location_t, r.details
        );
    }
}

fn verdict(reports: &[CheckReport]) -> i32 {
    if reports.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_ERROR
    }
}

fn run(cfg: &RunConfig) -> Result<i32> {
    let result = runner::run_main(cfg);
    if let Err(e @ Error::BlowupDetected { .. }) = &result {
        eprintln!("blow-up: {e}");
        return Ok(EXIT_BLOWUP);
    }
    let summary = result?;
    println!(
        "{} steps to t = {} (min dominance margin {:e}); series in {}",
        summary.outcome.steps,
        summary.outcome.final_t,
        summary.outcome.min_dominance_margin,
        cfg.outputs.series_path.display()
    );
    if let RunStatus::Blowup { t, max_u } = summary.outcome.status {
        println!("blow-up at t = {t}: max u = {max_u:e}");
    }
    print_reports(&summary.reports);
    Ok(summary.exit_code)
}

fn dispatch(cli: Cli) -> Result<i32> {
    let out_dir = cli.out_dir.as_deref();
    match cli.command {
        Command::Run { config } => run(&rebase_outputs(load(&config)?, out_dir)),
        Command::Preset {
            name,
            overrides,
            print_config,
        } => {
            let cfg = preset(&name)?.with_overrides(overrides.iter().map(String::as_str))?;
            let cfg = rebase_outputs(cfg, out_dir);
            if print_config {
                print!("{}", cfg.to_config_string());
                return Ok(EXIT_OK);
            }
            run(&cfg)
        }
        Command::CompareHeat { config } => {
            let cfg = rebase_outputs(load(&config)?, out_dir);
            let cmp = runner::compare_heat(&cfg)?;
            if let Some(last) = cmp.series.last() {
                println!("d(T) = {:e} at T = {}", last.d, last.t);
            }
            print_reports(std::slice::from_ref(&cmp.report));
            Ok(verdict(std::slice::from_ref(&cmp.report)))
        }
        Command::Converge { config, axis } => {
            let cfg = rebase_outputs(load(&config)?, out_dir);
            let conv = runner::converge(&cfg, axis.into())?;
            println!("observed order {:.4}", conv.order);
            print_reports(std::slice::from_ref(&conv.report));
            Ok(verdict(std::slice::from_ref(&conv.report)))
        }
        Command::Check { series, m0, alpha, tau } => {
            let reports = runner::check_series_file(&series, m0, alpha, tau, &Checks::default())?;
            print_reports(&reports);
            Ok(verdict(&reports))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
