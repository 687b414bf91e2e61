use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use taut_cli::bench::cmd_bench;
use taut_cli::commands::{cmd_solve, cmd_sweep, cmd_verify, OutputFormat};

/// Energy-minimal sensing and transmission rate scheduling under deadlines,
/// a sensing blackout and an optional receiver buffer.
#[derive(Parser)]
#[command(name = "taut", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and emit the solution (JSON) or schedule table (CSV).
    Solve {
        scenario: PathBuf,
        /// Require the finite-buffer solver (the scenario must carry
        /// buffer_bits; it is used automatically when present).
        #[arg(long)]
        buffered: bool,
        /// Emit the solution as JSON (default).
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        /// Emit the schedule table as CSV instead of JSON.
        #[arg(long)]
        csv: bool,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a stored solution against its scenario.
    Verify {
        scenario: PathBuf,
        solution: PathBuf,
    },
    /// Run the randomized-channel benchmark described by a config file.
    Bench {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate energy as a function of the height over the search area.
    Sweep {
        scenario: PathBuf,
        /// Number of grid points.
        #[arg(long, default_value_t = 1000)]
        points: usize,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            scenario,
            buffered,
            json: _,
            csv,
            out,
        } => {
            let format = if csv { OutputFormat::Csv } else { OutputFormat::Json };
            cmd_solve(&scenario, buffered, format, out.as_deref())
        }
        Command::Verify { scenario, solution } => cmd_verify(&scenario, &solution),
        Command::Bench { config, seed, out } => cmd_bench(&config, seed, out.as_deref()),
        Command::Sweep {
            scenario,
            points,
            out,
        } => cmd_sweep(&scenario, points, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
