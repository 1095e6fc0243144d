//! Command-line front end: `forecast`, `simulate` and `compare`.
//!
//! Every command writes `summary.json` next to its CSV output, with the
//! effective configuration embedded so a run can be repeated from it.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::controller::ControllerKind;
use crate::error::{Error, Result};
use crate::forecast::RmseTable;
use crate::sim::{run, run_streaming, savings_curve, write_savings_csv, ReportWriter, SavingsPoint, SimReport};
use crate::trace::normalize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "remote-site", version, about = "Shared remote base-station and edge-server energy simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the predictors and write the per-series, per-horizon RMSE table.
    Forecast(CommonArgs),
    /// Run one controller over the configured horizon.
    Simulate(CommonArgs),
    /// Savings of both controllers for each configured user count.
    Compare(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// drc_rs, rrm or oracle.
    #[arg(long)]
    pub controller: Option<String>,
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub slots: Option<usize>,
    /// Use generated traces even when trace files are configured.
    #[arg(long)]
    pub synth: bool,
}

impl CommonArgs {
    /// Configuration file (or defaults) with the flag overrides applied.
    pub fn effective_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.scenario.seed = seed;
        }
        if let Some(name) = &self.controller {
            cfg.controller.kind = name.parse()?;
        }
        if let Some(users) = self.users {
            cfg.scenario.n_users = users;
        }
        if let Some(slots) = self.slots {
            cfg.scenario.n_slots = slots;
        }
        if self.synth {
            cfg.scenario.synth = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::Invariant { .. } => EXIT_INVARIANT,
        _ => EXIT_USAGE,
    }
}

#[derive(Serialize)]
struct ForecastSummary<'a> {
    config: &'a RunConfig,
    rmse: &'a RmseTable,
}

#[derive(Serialize)]
struct Paired {
    drc_rs_savings_percent: f64,
    rrm_savings_percent: f64,
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    config: &'a RunConfig,
    report: &'a SimReport,
    paired: Paired,
}

#[derive(Serialize)]
struct CompareSummary<'a> {
    config: &'a RunConfig,
    points: &'a [SavingsPoint],
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Hold-out RMSE of the four series, all normalized to [0, 1]. Writes
/// `rmse.csv` and `summary.json`.
pub fn cmd_forecast(cfg: &RunConfig, out: &Path) -> Result<RmseTable> {
    fs::create_dir_all(out)?;
    let traces = cfg.traces()?;
    let f = &cfg.forecast;
    let series = [
        (normalize(&traces.traffic_a), f.traffic),
        (normalize(&traces.traffic_b), f.traffic),
        (normalize(&traces.solar), f.harvest),
        (normalize(&traces.wind), f.harvest),
    ];
    let table = RmseTable::compute(&series, &f.horizons)?;
    table.write_csv(&out.join("rmse.csv"))?;
    write_json(&out.join("summary.json"), &ForecastSummary { config: cfg, rmse: &table })?;
    Ok(table)
}

/// Runs the configured controller, streaming `report.csv`, and pairs it with
/// the other of the lookahead and reservation controllers in `summary.json`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<SimReport> {
    let scenario = cfg.scenario()?;
    fs::create_dir_all(out)?;
    let baseline = crate::sim::baseline_energy(&scenario)?;
    let mut writer = ReportWriter::create(&out.join("report.csv"), baseline)?;
    let report = run_streaming(&scenario, |r| writer.write(r))?;
    writer.finish()?;

    let savings_of = |kind: ControllerKind| -> Result<f64> {
        if kind == report.controller {
            return Ok(report.savings_percent);
        }
        let mut other = scenario.clone();
        other.controller = kind;
        Ok(run(&other)?.savings_percent)
    };
    let paired = Paired {
        drc_rs_savings_percent: savings_of(ControllerKind::DrcRs)?,
        rrm_savings_percent: savings_of(ControllerKind::Rrm)?,
    };
    write_json(&out.join("summary.json"), &SimulateSummary { config: cfg, report: &report, paired })?;
    Ok(report)
}

/// Savings curve over `scenario.user_counts`. Writes `savings_curve.csv` and
/// `summary.json`.
pub fn cmd_compare(cfg: &RunConfig, out: &Path) -> Result<Vec<SavingsPoint>> {
    let scenario = cfg.scenario()?;
    fs::create_dir_all(out)?;
    let points = savings_curve(&scenario, &cfg.scenario.user_counts)?;
    write_savings_csv(&out.join("savings_curve.csv"), &points)?;
    write_json(&out.join("summary.json"), &CompareSummary { config: cfg, points: &points })?;
    Ok(points)
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Forecast(args) => cmd_forecast(&args.effective_config()?, &args.out).map(drop),
        Command::Simulate(args) => cmd_simulate(&args.effective_config()?, &args.out).map(drop),
        Command::Compare(args) => cmd_compare(&args.effective_config()?, &args.out).map(drop),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Messages go to stdout/stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
