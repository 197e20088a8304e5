//! `qfl`: verification runs, scans and coefficient exports for the
//! quantum field of upper triangular matrices.
//!
//! Exit status is 0 when every check passes, 1 when some check fails and 2
//! on configuration or runtime errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{RunConfig, DEFAULT_Q_GRID};
use output::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Lattice(#[from] qfl_core::qlattice::LatticeError),
    #[error(transparent)]
    Fiber(#[from] qfl_core::fiber::FiberError),
    #[error(transparent)]
    Fusion(#[from] qfl_core::fusion::FusionError),
    #[error(transparent)]
    Haar(#[from] qfl_core::haar::HaarError),
    #[error("thread pool: {0}")]
    Threads(String),
}

#[derive(Debug, Parser)]
#[command(name = "qfl", version, about = "Numerical checks on the quantum field of upper triangular matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// A single deformation parameter in (0, 1); combined with --q-grid.
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Comma-separated deformation parameters in (0, 1).
    #[arg(long = "q-grid", global = true, value_delimiter = ',')]
    q_grid: Option<Vec<f64>>,
    /// Truncation block for the generator checks.
    #[arg(long = "nmax", global = true, default_value_t = 20)]
    n_max: usize,
    /// Overrides the default tolerance of the command's checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Registered test function name(s), comma separated.
    #[arg(long, global = true, default_value = "bump")]
    function: String,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized checks; defaults to a hash of the q-grid.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Residuals of the generator relations up to --nmax.
    Relations,
    /// Fusion list and Clebsch-Gordan check for one tensor product;
    /// coefficients go to --out when given.
    Fusion {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Haar functional along the grid against its q = 1 limit.
    Haar,
    /// Pentagon equation and unitarity of the multiplicative unitary.
    Pentagon {
        #[arg(long, default_value_t = 2)]
        blocks: u32,
    },
    /// Right invariance of the Haar functional on random inputs.
    Invariance {
        #[arg(long, default_value_t = 3)]
        blocks: usize,
        #[arg(long, default_value_t = 4)]
        trials: usize,
    },
    /// Norm of a section along the grid, with the classical norm at q = 1.
    Continuity {
        #[arg(long, default_value = "standard")]
        section: String,
    },
    /// Clebsch-Gordan coefficients for all n, m <= --max-block.
    CgExport {
        #[arg(long = "max-block", default_value_t = 4)]
        max_block: usize,
    },
}

/// `1 - 2^-j` for `j` in `range`.
fn dyadic_grid(range: std::ops::RangeInclusive<i32>) -> Vec<f64> {
    range.map(|j| 1.0 - 2f64.powi(-j)).collect()
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QFL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .map_err(|_| CliError::Config(format!("QFL_THREADS={raw:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Threads(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let default_grid = match cli.command {
        Command::Haar => dyadic_grid(2..=10),
        Command::Continuity { .. } => dyadic_grid(1..=10),
        _ => DEFAULT_Q_GRID.to_vec(),
    };
    let cfg = RunConfig::build(
        cli.q,
        cli.q_grid,
        &default_grid,
        cli.n_max,
        cli.tol,
        cli.function,
        cli.out,
        cli.format,
        cli.seed,
    )?;
    match cli.command {
        Command::Relations => commands::relations(&cfg),
        Command::Fusion { n, m } => commands::fusion(&cfg, n, m),
        Command::Haar => commands::haar(&cfg),
        Command::Pentagon { blocks } => commands::pentagon(&cfg, blocks),
        Command::Invariance { blocks, trials } => commands::invariance(&cfg, blocks, trials),
        Command::Continuity { section } => commands::continuity(&cfg, &section),
        Command::CgExport { max_block } => commands::cg_export(&cfg, max_block),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
