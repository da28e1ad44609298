//! Run settings: flags > `MODAL_*` environment > config file > defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use modal_core::actualization::ActualizationOptions;
use modal_core::measurement::{MeasurementOptions, DEFAULT_RELIABILITY_THRESHOLD};
use modal_core::operator::{DEFAULT_CLUSTER_TOL, DEFAULT_HERMITICITY_TOL};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every subcommand. Flag values win over the environment
/// (clap resolves both); the config file fills whatever is still unset.
#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// Seed for every stochastic step.
    #[arg(long, global = true, env = "MODAL_SEED")]
    pub seed: Option<u64>,
    /// Relative eigenvalue clustering tolerance.
    #[arg(long, global = true, env = "MODAL_TOL_CLUSTER")]
    pub tol_cluster: Option<f64>,
    /// Relative Hermiticity tolerance for input matrices.
    #[arg(long, global = true, env = "MODAL_TOL_HERM")]
    pub tol_herm: Option<f64>,
    /// Maximum cross-term ratio for a reliable measurement.
    #[arg(long, global = true, env = "MODAL_RELIABILITY_THRESHOLD")]
    pub reliability_threshold: Option<f64>,
    /// Number of sampled trials.
    #[arg(long, global = true, env = "MODAL_TRIALS")]
    pub trials: Option<u64>,
    #[arg(long, global = true, value_enum, env = "MODAL_FORMAT")]
    pub format: Option<Format>,
    /// Shorthand for `--format json`.
    #[arg(long, global = true, conflicts_with_all = ["format", "csv"])]
    pub json: bool,
    /// Shorthand for `--format csv`.
    #[arg(long, global = true, conflicts_with = "format")]
    pub csv: bool,
    /// Write output here instead of stdout.
    #[arg(long, global = true, env = "MODAL_OUT")]
    pub out: Option<PathBuf>,
    /// TOML file with any of the keys above (snake_case).
    #[arg(long, global = true, env = "MODAL_CONFIG")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    tol_cluster: Option<f64>,
    tol_herm: Option<f64>,
    reliability_threshold: Option<f64>,
    trials: Option<u64>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub seed: Option<u64>,
    pub tol_cluster: f64,
    pub tol_herm: f64,
    pub reliability_threshold: f64,
    pub trials: Option<u64>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Input(format!("bad config {}: {e}", path.display())))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Input(format!("--{name} must be positive (got {v})")))
    }
}

impl Settings {
    pub fn resolve(args: &GlobalArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let flag_format = if args.json {
            Some(Format::Json)
        } else if args.csv {
            Some(Format::Csv)
        } else {
            args.format
        };
        Ok(Self {
            seed: args.seed.or(file.seed),
            tol_cluster: positive(
                "tol-cluster",
                args.tol_cluster.or(file.tol_cluster).unwrap_or(DEFAULT_CLUSTER_TOL),
            )?,
            tol_herm: positive(
                "tol-herm",
                args.tol_herm.or(file.tol_herm).unwrap_or(DEFAULT_HERMITICITY_TOL),
            )?,
            reliability_threshold: positive(
                "reliability-threshold",
                args.reliability_threshold
                    .or(file.reliability_threshold)
                    .unwrap_or(DEFAULT_RELIABILITY_THRESHOLD),
            )?,
            trials: args.trials.or(file.trials),
            format: flag_format.or(file.format).unwrap_or(Format::Json),
            out: args.out.clone().or(file.out),
        })
    }

    pub fn actualization(&self) -> ActualizationOptions {
        ActualizationOptions {
            cluster_tol: self.tol_cluster,
            ..Default::default()
        }
    }

    pub fn measurement(&self) -> MeasurementOptions {
        MeasurementOptions {
            reliability_threshold: self.reliability_threshold,
            actualization: self.actualization(),
        }
    }

    pub fn require_seed(&self, what: &str) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Input(format!("{what} is stochastic: --seed is required")))
    }
}
