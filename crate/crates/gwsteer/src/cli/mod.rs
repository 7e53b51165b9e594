//! Command-line front door: problem files in, JSON/CSV results out.
//!
//! Exit codes: 0 on success (including convergence warnings recorded in
//! the result file), 2 on unusable input (parse errors, bad flags), 3 on
//! solver failure.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::{Error, Result};

pub mod commands;
pub mod problem;
pub mod result;

pub use commands::SweepMode;
pub use problem::{load_problem, parse_problem, LoadedProblem};
pub use result::{read_result, ResultFile, RolloutSummary};

#[derive(Debug, Parser)]
#[command(
    name = "gwsteer",
    about = "Covariance steering with a Gromov-Wasserstein shape cost",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the shape-steering problem in a problem file.
    Solve {
        /// Problem JSON file.
        problem: PathBuf,
        /// Override the file's scalarization weight.
        #[arg(long)]
        lambda: Option<f64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Propagate the uncontrolled system and report its shape discrepancy.
    Uncontrolled {
        problem: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sample trajectories under a solved policy (or none).
    Rollout {
        problem: PathBuf,
        /// Number of sample paths.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Override the problem file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Result file whose policy drives the rollout.
        #[arg(long, required_unless_present = "uncontrolled")]
        policy: Option<PathBuf>,
        /// Roll out the uncontrolled system instead of a policy file.
        #[arg(long, conflicts_with = "policy")]
        uncontrolled: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sweep the scalarization weight or the target orientation.
    Sweep {
        problem: PathBuf,
        #[arg(long, value_enum)]
        mode: SweepMode,
        /// Comma-separated parameter values (required for --mode lambda).
        #[arg(long)]
        values: Option<String>,
        /// Grid size over [0, pi) for --mode theta.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// One shape-steering run vs. the orientation sweep, head to head.
    Compare {
        problem: PathBuf,
        /// Grid size for the sweep side.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

/// Dispatch a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            problem,
            lambda,
            out,
        } => commands::cmd_solve(&problem, lambda, &out).map(drop),
        Command::Uncontrolled { problem, out } => {
            commands::cmd_uncontrolled(&problem, &out).map(drop)
        }
        Command::Rollout {
            problem,
            samples,
            seed,
            policy,
            uncontrolled,
            out,
        } => commands::cmd_rollout(&problem, samples, seed, policy.as_deref(), uncontrolled, &out)
            .map(drop),
        Command::Sweep {
            problem,
            mode,
            values,
            grid,
            out,
        } => commands::cmd_sweep(&problem, mode, values.as_deref(), grid, &out).map(drop),
        Command::Compare { problem, grid, out } => {
            commands::cmd_compare(&problem, grid, &out).map(drop)
        }
    }
}

/// Exit-code contract: 2 for unusable input, 3 for solver-side failures,
/// 1 for environment problems (I/O).
pub fn exit_code(error: &Error) -> i32 {
    if error.is_input_error() {
        2
    } else if matches!(error, Error::Io(_)) {
        1
    } else {
        3
    }
}
