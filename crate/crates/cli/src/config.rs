//! Config file sections and their merge with command-line flags.
//!
//! The file is TOML: common keys at the top level, one table per
//! subcommand. A flag given on the command line wins over the file.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub threshold: Option<toml::Table>,
    pub estimate: Option<toml::Table>,
    pub predict: Option<toml::Table>,
    pub simulate: Option<toml::Table>,
    pub compare: Option<toml::Table>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
    }
}

/// Overlays the flags that were given onto the file section.
pub fn merge<T: Serialize + DeserializeOwned>(section: Option<&toml::Table>, flags: &T) -> anyhow::Result<T> {
    let mut table = section.cloned().unwrap_or_default();
    let given = toml::Table::try_from(flags).context("serializing flags")?;
    for (k, v) in given {
        table.insert(k, v);
    }
    table.try_into().map_err(|e: toml::de::Error| ConfigError(e.to_string()).into())
}

fn comma_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| format!("bad list element `{x}`")))
        .collect()
}

fn f64_list(s: &str) -> Result<Vec<f64>, String> {
    comma_list(s)
}

fn usize_list(s: &str) -> Result<Vec<usize>, String> {
    comma_list(s)
}

fn str_list(s: &str) -> Result<Vec<String>, String> {
    Ok(s.split(',').map(|x| x.trim().to_string()).collect())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub dv: Option<usize>,
    #[arg(long)]
    pub dc: Option<usize>,
    /// Chain length.
    #[arg(long = "l")]
    pub l: Option<usize>,
    /// Bisection tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateArgs {
    #[arg(long)]
    pub dv: Option<usize>,
    #[arg(long)]
    pub dc: Option<usize>,
    #[arg(long = "l")]
    pub l: Option<usize>,
    /// VNs per position used for the trajectories.
    #[arg(long = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated, strictly increasing epsilon grid.
    #[arg(long, value_parser = f64_list)]
    pub grid: Option<::std::vec::Vec<f64>>,
    /// Epsilon of the truncated run used for nu and theta.
    #[arg(long)]
    pub nu_theta_epsilon: Option<f64>,
    /// Relative half-width of the plateau band.
    #[arg(long)]
    pub plateau_tol: Option<f64>,
    #[arg(long)]
    pub de_tol: Option<f64>,
    /// Peeling steps between recorded samples (0 picks N / 100).
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictArgs {
    /// Scaling-parameter table written by `estimate`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// CSV with header `epsilon,N,L,W`; W is a window size or `full`.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Epsilons for a cartesian grid (instead of --grid).
    #[arg(long, value_parser = f64_list)]
    pub eps: Option<::std::vec::Vec<f64>>,
    #[arg(long = "n", value_parser = usize_list)]
    pub n: Option<::std::vec::Vec<usize>>,
    #[arg(long = "l", value_parser = usize_list)]
    pub l: Option<::std::vec::Vec<usize>>,
    /// Window sizes or `full`.
    #[arg(long = "w", value_parser = str_list)]
    pub w: Option<::std::vec::Vec<String>>,
    /// Fix N (W + dv - 1) to this many bits; N is derived per window size.
    #[arg(long)]
    pub latency: Option<usize>,
    /// `refined`, `olmos` or `both`.
    #[arg(long)]
    pub model: Option<String>,
    /// Also write the BLER reconciliation report for full-BP rows.
    #[arg(long)]
    pub reconcile: Option<bool>,
    /// Baseline constants; the (5,10) values are used when unset.
    #[arg(long)]
    pub baseline_alpha_per_l: Option<f64>,
    #[arg(long)]
    pub baseline_gamma: Option<f64>,
    #[arg(long)]
    pub baseline_nu: Option<f64>,
    #[arg(long)]
    pub baseline_theta: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long)]
    pub dv: Option<usize>,
    #[arg(long)]
    pub dc: Option<usize>,
    #[arg(long = "l")]
    pub l: Option<usize>,
    #[arg(long = "n")]
    pub n: Option<usize>,
    #[arg(long, value_parser = f64_list)]
    pub eps: Option<::std::vec::Vec<f64>>,
    /// `full` or a window size.
    #[arg(long)]
    pub decoder: Option<String>,
    /// `final` (state after the last window) or `decision`.
    #[arg(long)]
    pub accounting: Option<String>,
    /// Fixed number of frames per point; overrides the event target.
    #[arg(long)]
    pub frames: Option<u64>,
    #[arg(long)]
    pub target: Option<u64>,
    #[arg(long)]
    pub max_frames: Option<u64>,
    #[arg(long)]
    pub expurgate: Option<bool>,
    #[arg(long)]
    pub fixed_graph: Option<bool>,
    #[arg(long)]
    pub batch: Option<usize>,
    /// Wall-clock budget; exceeding it aborts with partial results.
    #[arg(long)]
    pub max_seconds: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareArgs {
    /// Simulation CSV.
    #[arg(long)]
    pub sim: Option<PathBuf>,
    /// Prediction CSV.
    #[arg(long)]
    pub pred: Option<PathBuf>,
}
