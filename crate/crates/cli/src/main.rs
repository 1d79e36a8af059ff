//! `bvlasov run | sweep | verify`.
//!
//! Exit codes: 0 when every diagnostic passes, 2 when a diagnostic fails,
//! 1 on any error (bad config, aborted run, I/O). `BVLASOV_THREADS` sets the
//! worker count.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::Status;

#[derive(Parser)]
#[command(
    name = "bvlasov",
    version,
    about = "Vanishing-viscosity Burgers-Vlasov solver"
)]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write snapshots, diagnostics and a manifest.
    Run {
        config: PathBuf,
        /// Output directory [default: bvlasov-out/<scenario name>]
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Repeat a scenario over a decreasing list of viscosities.
    Sweep {
        config: PathBuf,
        /// Comma-separated, strictly decreasing, e.g. 0.04,0.02,0.01
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the time stepper against the Picard solver and the
    /// closed-form transport solution (smooth data only).
    Verify {
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

const THREADS_VAR: &str = "BVLASOV_THREADS";

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("cannot configure the worker pool")
}

fn default_out(config: &std::path::Path, sub: &str) -> PathBuf {
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    PathBuf::from("bvlasov-out").join(format!("{stem}-{sub}"))
}

fn dispatch(cli: Cli) -> Result<Status> {
    init_threads()?;
    match cli.command {
        Command::Run { config, out } => {
            let out = out.unwrap_or_else(|| default_out(&config, "run"));
            commands::cmd_run(&config, &out)
        }
        Command::Sweep { config, eps, out } => {
            let out = out.unwrap_or_else(|| default_out(&config, "sweep"));
            commands::cmd_sweep(&config, &eps, &out)
        }
        Command::Verify { config, out } => {
            let out = out.unwrap_or_else(|| default_out(&config, "verify"));
            commands::cmd_verify(&config, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match dispatch(cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
