use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fixiter_cli::{cmd_compare, cmd_datadep, cmd_dde, cmd_table, CliError, ExperimentConfig, Format};

#[derive(Debug, Parser)]
#[command(name = "fixiter", version, about = "Fixed-point iteration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate iterates of each configured scheme.
    Table {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Compare the convergence rates of two schemes.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Solve a delay differential equation with Picard-S.
    Dde {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        tol: f64,
        /// Solution CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the fixed-point drift under a constant perturbation of the map.
    Datadep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, allow_hyphen_values = true)]
        perturb: f64,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Table { config, out, format } => cmd_table(&ExperimentConfig::load(&config)?, out.as_deref(), format),
        Command::Compare { config, a, b } => cmd_compare(&ExperimentConfig::load(&config)?, &a, &b),
        Command::Dde { problem, step, tol, out } => cmd_dde(&problem, step, tol, out.as_deref()),
        Command::Datadep { config, epsilon, perturb } => cmd_datadep(&ExperimentConfig::load(&config)?, epsilon, perturb),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fixiter: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
