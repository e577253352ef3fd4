use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gabden::{run, Command, Outcome};

/// Gabor density toolkit: configs in, reports and CSV tables out.
#[derive(Parser)]
#[command(name = "gabden", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for Monte Carlo constants and sample draws.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate an STFT field and dump it as CSV + JSON.
    Stft(RunArgs),
    /// Density profile of a point set or family over increasing radii.
    Density(RunArgs),
    /// Riesz/frame bounds of a finite Gabor section.
    Bounds(RunArgs),
    /// Run verification cases and emit one JSON report per case.
    Verify(RunArgs),
    /// Summarize previously written case reports.
    Report(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::Stft(a) => (Command::Stft, a),
        Cmd::Density(a) => (Command::Density, a),
        Cmd::Bounds(a) => (Command::Bounds, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Report(a) => (Command::Report, a),
    };
    let output = run(command, &args.config, args.out.as_deref(), args.seed);
    match &output.outcome {
        Outcome::Pass => {
            for a in &output.artifacts {
                println!("wrote {}", a.display());
            }
        }
        Outcome::ConfigError(msg) => eprintln!("config error: {msg}"),
        Outcome::HypothesisFailure => eprintln!("hypothesis failure; see reports"),
        Outcome::VerificationFailure => eprintln!("verification failure; see reports"),
    }
    ExitCode::from(output.outcome.code())
}
