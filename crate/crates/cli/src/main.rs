//! Command-line harness: simulation grids, CSV fitting and evaluation,
//! loss-timing benchmarks and the bias/variance protocol.

mod commands;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "rankaft",
    version,
    about = "Accelerated failure time models with rank-based losses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation scenario grid and write result tables.
    Simulate(commands::simulate::Args),
    /// Fit a model (deep, paft or saft) to a CSV dataset.
    Fit(commands::fit::Args),
    /// Evaluate a saved model on a CSV dataset.
    Evaluate(commands::evaluate::Args),
    /// Time the full vs sub-sampled Gehan loss across sample sizes.
    Bench(commands::bench::Args),
    /// Replicated bias/variance decomposition on a fixed covariate grid.
    BiasVariance(commands::bias_variance::Args),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Fit(args) => commands::fit::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Bench(args) => commands::bench::run(args),
        Command::BiasVariance(args) => commands::bias_variance::run(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
