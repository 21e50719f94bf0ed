//! `optrec`: batch front end for the optimal recovery solvers.
//!
//! Exit codes: 0 success, 1 bad input, 2 infeasible or unbounded program,
//! 3 numerical failure, 4 failed verification.

mod commands;
mod error;
mod output;
mod spec_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ConvergeArgs, SolveArgs, VerifyArgs, DEFAULT_SAMPLES};

#[derive(Debug, Parser)]
#[command(name = "optrec", version, about = "Optimal recovery of linear functionals from point values")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a spec and write the result document.
    Solve {
        spec: PathBuf,
        /// Solver tolerance [default: spec value or 1e-8].
        #[arg(long)]
        tol: Option<f64>,
        /// Truncation level of the lower bound [default: max(4n, m)].
        #[arg(long = "N")]
        truncation: Option<usize>,
        /// Grid size of the upper bound [default: 128].
        #[arg(long = "K")]
        grid_size: Option<usize>,
        /// Output path [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random functions drawn for the oracle cross-check.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-check a result document and append a verification block to it.
    Verify {
        result: PathBuf,
        /// Random functions drawn; 0 runs the structural checks only.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// [default: the seed recorded in the result]
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tabulate the lower and upper bounds over truncation levels and grids.
    Converge {
        spec: PathBuf,
        /// Ascending truncation levels [default: max(n, m) doubled up to 256].
        #[arg(long = "N-list", value_delimiter = ',')]
        truncations: Option<Vec<usize>>,
        /// Ascending grid sizes; grids are nested [default: K/4, K/2, K].
        #[arg(long = "K-list", value_delimiter = ',')]
        grid_sizes: Option<Vec<usize>>,
        #[arg(long)]
        tol: Option<f64>,
        /// JSON output path; the text table then goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OPTREC_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Solve {
            spec,
            tol,
            truncation,
            grid_size,
            out,
            samples,
            seed,
        } => commands::solve(&SolveArgs {
            spec,
            tol,
            truncation,
            grid_size,
            out,
            samples,
            seed,
        }),
        Command::Verify { result, samples, seed } => commands::verify(&VerifyArgs { result, samples, seed }),
        Command::Converge {
            spec,
            truncations,
            grid_sizes,
            tol,
            out,
        } => commands::converge(&ConvergeArgs {
            spec,
            truncations,
            grid_sizes,
            tol,
            out,
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
