//! `qmi`: batch front-end for the mutual information solver.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qmi_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qmi", version, about = "Mutual information between planar material bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Master seed; overrides `seed`.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Mesh refinement level; overrides `mesh.refinement`.
    #[arg(long, value_name = "N")]
    refinement: Option<u32>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// QMI of two bodies over a list of separations.
    QmiSweep(Common),
    /// Monopole capacitance of one body over a λ grid.
    Capacitance(Common),
    /// Strong subadditivity report for three bodies.
    Ssa(Common),
    /// Tripartite information of three bodies.
    Tripartite(Common),
    /// Dirichlet-limit worldline estimate for two bodies.
    Worldline(Common),
    /// Built-in invariant suite.
    Selftest(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::QmiSweep(c) => ("qmi-sweep", c),
        Command::Capacitance(c) => ("capacitance", c),
        Command::Ssa(c) => ("ssa", c),
        Command::Tripartite(c) => ("tripartite", c),
        Command::Worldline(c) => ("worldline", c),
        Command::Selftest(c) => ("selftest", c),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(name, common) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
