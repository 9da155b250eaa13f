use clap::{Args, Parser, Subcommand};
use isslab_cli::{commands, config, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Batch driver for bilinear feedback simulations and ISS certificates.
#[derive(Parser)]
#[command(name = "isslab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the closed loop directly (IMEX) and write the trajectory.
    Simulate(RunArgs),
    /// Solve the closed loop by the fixed-point iteration on the feedback.
    Picard(RunArgs),
    /// Certify an ISS estimate over a seeded ensemble.
    Certify(RunArgs),
    /// Cartesian product over listed parameter values, one subdirectory per
    /// point.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the INI-style run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Concurrency limit for sweep points and ensembles.
    #[arg(long)]
    jobs: Option<usize>,
}

fn load(args: &RunArgs) -> Result<config::RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = config::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run() -> Result<i32, CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(args) => commands::cmd_simulate(&load(args)?, &args.out),
        Command::Picard(args) => commands::cmd_picard(&load(args)?, &args.out),
        Command::Certify(args) => commands::cmd_certify(&load(args)?, &args.out),
        Command::Sweep(args) => {
            let cfg = load(args)?;
            commands::cmd_sweep(&cfg, &args.out, args.jobs)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("isslab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
