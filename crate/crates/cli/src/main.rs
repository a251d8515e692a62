//! `scldpc`: threshold, estimate, predict, simulate, compare.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use config::{CompareArgs, ConfigFile, EstimateArgs, PredictArgs, SimulateArgs, ThresholdArgs};

/// Bad flags, config file or input file contents.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// A run stopped early; whatever was finished has been written.
#[derive(Debug)]
pub struct ResourceAbort(pub String);

impl std::fmt::Display for ResourceAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "resource limit reached: {}", self.0)
    }
}

impl std::error::Error for ResourceAbort {}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_UNUSABLE: u8 = 3;
pub const EXIT_RESOURCE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "scldpc", version, about = "SC-LDPC codes on the BEC: simulation and finite-length scaling laws")]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML config file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// BP threshold of the coupled chain by density evolution.
    Threshold(ThresholdArgs),
    /// Scaling-parameter table from Monte-Carlo trajectories.
    Estimate(EstimateArgs),
    /// Error-rate predictions from a table.
    Predict(PredictArgs),
    /// Monte-Carlo error rates.
    Simulate(SimulateArgs),
    /// Simulated against predicted error rates.
    Compare(CompareArgs),
}

/// Settings shared by every subcommand after merging flags and file.
#[derive(Debug, Clone)]
pub struct Common {
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub verbose: u8,
    pub file: ConfigFile,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() || e.downcast_ref::<clap::Error>().is_some() {
        return EXIT_CONFIG;
    }
    if e.downcast_ref::<ResourceAbort>().is_some() {
        return EXIT_RESOURCE;
    }
    match e.downcast_ref::<scldpc::Error>() {
        Some(scldpc::Error::Unusable(_) | scldpc::Error::Indeterminate(_)) => EXIT_UNUSABLE,
        Some(scldpc::Error::Io(_)) | None => 1,
        Some(_) => EXIT_CONFIG,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let common = Common {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        threads: cli.threads.or(file.threads),
        out: cli.out.clone().or(file.out.clone()).unwrap_or_else(|| PathBuf::from("scldpc-out")),
        verbose: cli.verbose,
        file,
    };
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(ConfigError("--threads must be positive".into()).into());
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    std::fs::create_dir_all(&common.out)
        .map_err(|e| ConfigError(format!("cannot create {}: {e}", common.out.display())))?;
    match &cli.command {
        Command::Threshold(a) => commands::threshold(&common, a),
        Command::Estimate(a) => commands::estimate(&common, a),
        Command::Predict(a) => commands::predict(&common, a),
        Command::Simulate(a) => commands::simulate(&common, a),
        Command::Compare(a) => commands::compare(&common, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
