//! Command-line pipeline: ingest daily prices, describe groups, estimate
//! DID and SDID models, run attention regressions and simulate panels.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ConfigMap, RunConfig};
pub use error::{exit_code, CliError};
use output::{write_file, FIG_SVG, FIG_TIME, FIG_TRENDS, FIG_UNITS, REPORT_JSON, REPORT_TXT};
use pipeline::EstimatorKind;
use sdid_core::ErrorKind;

#[derive(Debug, Parser)]
#[command(
    name = "sdid",
    version,
    about = "Panel DID / SDID estimation and attention regressions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pooled return statistics per group.
    Describe(Overrides),
    /// Two-way fixed-effects difference-in-differences.
    Did(Overrides),
    /// Synthetic difference-in-differences with bootstrap standard errors.
    Sdid(Overrides),
    /// Launch x AI interaction regressions on attention changes.
    Attention(Overrides),
    /// Write a synthetic price file and a config to estimate it.
    Simulate(Overrides),
}

#[derive(Debug, Default, clap::Args)]
pub struct Overrides {
    /// Flat key = value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub treatment_date: Option<String>,
    /// Comma-separated month counts, or `full`.
    #[arg(long, value_name = "MONTHS")]
    pub window: Option<String>,
    #[arg(long, value_name = "B")]
    pub boot: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Covariate sets separated by `;`, e.g. `none; ln_vol,ln_cap`.
    #[arg(long)]
    pub covariates: Option<String>,
    #[arg(long)]
    pub liquidity_floor: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Replace SDID weights by uniform weights.
    #[arg(long)]
    pub uniform_weights: bool,
    /// Override any config key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Overrides {
    /// Config file values with the command-line flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut map = match &self.config {
            Some(p) => ConfigMap::load(p)?,
            None => ConfigMap::default(),
        };
        let mut put = |k: &str, v: String| map.set(k, v).map_err(CliError::config);
        if let Some(v) = &self.treatment_date {
            put("treatment_date", v.clone())?;
        }
        if let Some(v) = &self.window {
            put("windows", v.clone())?;
        }
        if let Some(v) = self.boot {
            put("boot", v.to_string())?;
        }
        if let Some(v) = self.seed {
            put("seed", v.to_string())?;
        }
        if let Some(v) = &self.covariates {
            put("covariate_sets", v.clone())?;
        }
        if let Some(v) = self.liquidity_floor {
            put("liquidity_floor", v.to_string())?;
        }
        if let Some(v) = &self.out {
            put("out", v.to_string_lossy().into_owned())?;
        }
        if let Some(v) = self.threads {
            put("threads", v.to_string())?;
        }
        if self.uniform_weights {
            put("uniform_weights", "true".to_string())?;
        }
        for pair in &self.set {
            map.set_pair(pair)?;
        }
        RunConfig::from_map(&map)
    }
}

impl Command {
    pub fn overrides(&self) -> &Overrides {
        match self {
            Command::Describe(o)
            | Command::Did(o)
            | Command::Sdid(o)
            | Command::Attention(o)
            | Command::Simulate(o) => o,
        }
    }
}

/// Files written by a successful run.
#[derive(Debug)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

fn row_failures(failures: &[(String, ErrorKind)]) -> Option<CliError> {
    if failures.is_empty() {
        return None;
    }
    let kind = [
        ErrorKind::NonConvergence,
        ErrorKind::Identification,
        ErrorKind::Input,
    ]
    .into_iter()
    .find(|k| failures.iter().any(|(_, f)| f == k))
    .expect("non-empty failures");
    let list: Vec<&str> = failures.iter().map(|(m, _)| m.as_str()).collect();
    Some(CliError::Rows {
        kind,
        message: format!(
            "{} model(s) failed:\n  {}",
            failures.len(),
            list.join("\n  ")
        ),
    })
}

/// Run one command. Reports are written even when some model rows fail; the
/// error then lists the failing rows.
pub fn run(command: &Command) -> Result<RunOutput, CliError> {
    let cfg = command.overrides().resolve()?;
    let pool = {
        let b = rayon::ThreadPoolBuilder::new();
        let b = match cfg.threads {
            Some(n) => b.num_threads(n),
            None => b,
        };
        b.build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?
    };
    pool.install(|| execute(command, &cfg))
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let dir = &cfg.out;
    let mut files = Vec::new();
    match command {
        Command::Describe(_) => {
            let r = pipeline::describe(cfg)?;
            files.push(write_file(dir, REPORT_JSON, output::to_json(&r))?);
            files.push(write_file(dir, REPORT_TXT, output::describe_text(&r))?);
        }
        Command::Did(_) | Command::Sdid(_) => {
            let kind = if matches!(command, Command::Did(_)) {
                EstimatorKind::Did
            } else {
                EstimatorKind::Sdid
            };
            let o = pipeline::estimate(cfg, kind)?;
            files.push(write_file(dir, REPORT_JSON, output::to_json(&o.report))?);
            files.push(write_file(
                dir,
                REPORT_TXT,
                output::estimate_text(&o.report),
            )?);
            files.push(write_file(
                dir,
                FIG_TRENDS,
                output::trends_csv(&o.figures)?,
            )?);
            files.push(write_file(
                dir,
                FIG_UNITS,
                output::unit_weights_csv(&o.figures)?,
            )?);
            files.push(write_file(
                dir,
                FIG_TIME,
                output::time_weights_csv(&o.figures)?,
            )?);
            // First model at its longest window.
            if let Some(f) = o
                .figures
                .iter()
                .take_while(|f| f.model == o.figures[0].model)
                .last()
            {
                files.push(write_file(dir, FIG_SVG, output::trends_svg(f))?);
            }
            if let Some(e) = row_failures(&o.failures) {
                return Err(e);
            }
        }
        Command::Attention(_) => {
            let o = pipeline::attention(cfg)?;
            files.push(write_file(dir, REPORT_JSON, output::to_json(&o.report))?);
            files.push(write_file(
                dir,
                REPORT_TXT,
                output::attention_text(&o.report),
            )?);
            if let Some(e) = row_failures(&o.failures) {
                return Err(e);
            }
        }
        Command::Simulate(_) => {
            let o = pipeline::simulate(cfg)?;
            let mut buf = Vec::new();
            sdid_core::panel_core::write_price_csv(&mut buf, &o.records)?;
            files.push(write_file(dir, "prices.csv", buf)?);
            files.push(write_file(
                dir,
                "simulated.conf",
                output::simulated_config(&o.report),
            )?);
            files.push(write_file(dir, REPORT_JSON, output::to_json(&o.report))?);
            files.push(write_file(
                dir,
                REPORT_TXT,
                output::simulate_text(&o.report),
            )?);
        }
    }
    Ok(RunOutput { files })
}
