//! Batch driver for the Markov-factor experiments.
//!
//! `mlab <experiment> --config path [--jobs N] [--out dir]` merges the config
//! over the experiment's defaults, runs it on a worker pool of `N` threads and
//! writes a CSV table and a JSON report under `dir`. Results do not depend on
//! `N`. Exit status is 0 on success, 2 when the headline statistic leaves the
//! configured band, and 1 on any error.

pub mod config;
pub mod experiments;
pub mod selftest;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{Experiment, ExperimentConfig};
use experiments::Report;

#[derive(Debug, Parser)]
#[command(name = "mlab", version, about = "Markov-factor experiments on cuspidal graph domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mehler–Heine gaps, Darboux errors and envelope ratios.
    JacobiCheck(RunArgs),
    /// Convexity index, regularity, modulus of continuity and `ε_n` table.
    DomainInfo(RunArgs),
    /// Extremal-candidate ratios `y·P_n^{(α,β)}` with an exponent fit.
    MarkovSweep(RunArgs),
    /// Exact `p = 2` factors, or ascent lower bounds for other `p`.
    EigenSweep(RunArgs),
    /// The normalised Jacobi integral `∫ f |P_n|^p / (ε_n n^{αp-4})`.
    Lemma31(RunArgs),
    /// Builds a cusp from `ε_n, C_n` data and audits it.
    Construct(RunArgs),
    /// Log-cusp sweep fitted with and without the logarithmic factor.
    Logcusp(RunArgs),
    /// Runs the built-in closed-form checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON config merged over the experiment's defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Directory for the CSV and JSON artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Print the fully resolved config and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, value_enum)]
    pub inject_fault: Option<selftest::Fault>,
}

/// Outcome of a run that did not error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    BandFailure,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::BandFailure => 2,
        }
    }
}

fn write_csv(path: &Path, report: &Report) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&report.columns)?;
    for row in &report.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Loads, runs and writes one experiment.
pub fn run_experiment(experiment: Experiment, args: &RunArgs, out: &mut impl Write) -> Result<Outcome> {
    let config = ExperimentConfig::load(experiment, args.config.as_deref())?;
    if args.print_config {
        writeln!(out, "{}", serde_json::to_string_pretty(&config)?)?;
        return Ok(Outcome::Pass);
    }
    let base = args.config.as_deref().and_then(Path::parent).unwrap_or(Path::new("."));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build().context("starting the worker pool")?;
    let report = pool.install(|| experiments::run(&config, base))?;

    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    if let Some(name) = &config.output.csv {
        write_csv(&args.out.join(name), &report)?;
    }
    if let Some(name) = &config.output.json {
        write_json(&args.out.join(name), &report.json)?;
    }
    if let (Some(name), Some(profile)) = (&config.output.profile, &report.profile) {
        write_json(&args.out.join(name), profile)?;
    }
    writeln!(out, "{}", report.summary)?;
    Ok(if report.passed { Outcome::Pass } else { Outcome::BandFailure })
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let (experiment, args) = match cli.command {
        Command::Selftest(a) => {
            return match selftest::run(a.inject_fault, &mut out) {
                Ok(failed) if failed.is_empty() => 0,
                Ok(failed) => {
                    eprintln!("selftest failed: {}", failed.join(", "));
                    1
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            };
        }
        Command::JacobiCheck(a) => (Experiment::JacobiCheck, a),
        Command::DomainInfo(a) => (Experiment::DomainInfo, a),
        Command::MarkovSweep(a) => (Experiment::MarkovSweep, a),
        Command::EigenSweep(a) => (Experiment::EigenSweep, a),
        Command::Lemma31(a) => (Experiment::Lemma31, a),
        Command::Construct(a) => (Experiment::Construct, a),
        Command::Logcusp(a) => (Experiment::Logcusp, a),
    };
    match run_experiment(experiment, &args, &mut out) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
