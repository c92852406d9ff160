//! `abvac` — config-driven Aharonov-Bohm phase scenarios with CSV reports.
//!
//! Exit codes: 0 success, 1 configuration or validation error, 2 geometry or
//! proximity error, 3 quadrature convergence failure.

mod config;
mod output;
mod runner;

use abvac::kernels::PolarizationSet;
use clap::{Parser, Subcommand};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Configuration, validation, or I/O problems (exit 1).
    Config(String),
    /// Errors surfaced by the simulator core.
    Core(abvac::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Core(err) => write!(f, "{err}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(err) => match err {
                abvac::Error::InvalidArgument(_) | abvac::Error::ScenarioValidity(_) => 1,
                abvac::Error::Geometry(_)
                | abvac::Error::Proximity { .. }
                | abvac::Error::SingularSeparation { .. } => 2,
                abvac::Error::Convergence { .. } => 3,
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "abvac",
    about = "Aharonov-Bohm phases from vacuum-energy shifts: scenario runs, sweeps, CSV reports",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Scenario configuration file (TOML; grammar documented in the README)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV reports and the normalized config
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the scenario chosen in the config
    /// (magnetic|intermediate|electric|kernel-check)
    #[arg(long, global = true)]
    scenario: Option<String>,

    /// Polarization content for mode-space runs (full|transverse|longitudinal)
    #[arg(long, global = true)]
    pol: Option<String>,

    /// Seed for the randomized verification sweeps
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Override the built-in check tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the mode-sum kernels against their closed forms and emit a CSV
    /// report (no config file required)
    KernelCheck {
        /// Number of log-spaced separations
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Smallest separation (m)
        #[arg(long, default_value_t = 0.01)]
        r_min: f64,
        /// Largest separation (m)
        #[arg(long, default_value_t = 10.0)]
        r_max: f64,
        /// Identity tolerance (relative)
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

fn parse_pol(s: &str) -> Result<PolarizationSet, CliError> {
    match s {
        "full" => Ok(PolarizationSet::Full),
        "transverse" => Ok(PolarizationSet::TransverseOnly),
        "longitudinal" => Ok(PolarizationSet::LongitudinalOnly),
        other => Err(CliError::Config(format!(
            "unknown polarization `{other}` (expected full, transverse, or longitudinal)"
        ))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let pol = cli.pol.as_deref().map(parse_pol).transpose()?;
    match cli.command {
        Some(Command::KernelCheck { samples, r_min, r_max, tol }) => {
            let kc = config::KernelCheckCfg { samples, r_min, r_max, tol };
            runner::execute_kernel_check(&kc, &cli.out, cli.seed, pol, cli.tol)?;
            Ok(())
        }
        None => {
            let path = cli.config.ok_or_else(|| {
                CliError::Config(
                    "no --config file given (or use the kernel-check subcommand)".into(),
                )
            })?;
            let text = std::fs::read_to_string(&path).map_err(|e| {
                CliError::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            runner::execute_config(
                &text,
                cli.scenario.as_deref(),
                &cli.out,
                pol,
                cli.seed,
                cli.tol,
            )?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
