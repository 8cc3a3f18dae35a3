//! `heliodrop` — stationary helium-drop profiles, hard-wall scattering
//! runs, velocity sweeps, and snapshot analysis.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver error,
//! 4 conservation breach or divergence.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::RawConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "heliodrop", version, about = "1D helium nanodrop vs hard wall")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonOpts {
    /// Key-value config file (dotted keys, strict).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. --set evolve.velocity_mps=30.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a stationary drop profile and report mu, N, X_eff.
    Profile {
        #[command(flatten)]
        common: CommonOpts,
        /// Output directory.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Time-evolve a boosted drop against the wall, writing snapshots and
    /// the conservation log.
    Evolve {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Run one evolution per velocity in sweep.velocities_mps.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Worker-pool size (default: number of processors).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Analyze snapshot CSVs: tail report, norms, phase coherence; with
    /// two snapshots also recession metrics.
    Analyze {
        /// Snapshot CSV files, earliest first.
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
        /// Optional directory for analysis.json (report always goes to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn build_config(common: &CommonOpts) -> Result<RawConfig, commands::CliError> {
    let mut cfg = match &common.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    for assignment in &common.set {
        cfg.set(assignment)?;
    }
    Ok(cfg)
}

fn run() -> Result<(), commands::CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Profile { common, out } => {
            let cfg = build_config(common)?;
            commands::run_profile(&cfg, out)
        }
        Command::Evolve { common, out } => {
            let cfg = build_config(common)?;
            commands::run_evolve(&cfg, out)
        }
        Command::Sweep { common, out, jobs } => {
            let cfg = build_config(common)?;
            commands::run_sweep(&cfg, out, *jobs)
        }
        Command::Analyze {
            snapshots,
            common,
            out,
        } => {
            let cfg = build_config(common)?;
            commands::run_analyze(snapshots, &cfg, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("heliodrop: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
