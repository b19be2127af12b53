use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quasilocal::cli::{run, Command};

#[derive(Parser)]
#[command(name = "quasilocal", version, about = "Lindblad dynamics on lattices: limit scans and channel verification")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (`section.key = value` lines)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and report.csv
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides run.seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cauchy increments of an evolved observable over growing volumes
    Scan(Common),
    /// Normalization, CP, semigroup law, duality and Kraus checks of one channel
    Verify(Common),
    /// Kraus operators extracted from the Choi matrix
    Kraus(Common),
}

fn main() -> ExitCode {
    let (command, c) = match Args::parse().command {
        Cmd::Scan(c) => (Command::Scan, c),
        Cmd::Verify(c) => (Command::Verify, c),
        Cmd::Kraus(c) => (Command::Kraus, c),
    };
    ExitCode::from(run(command, &c.config, c.out, c.seed).code() as u8)
}
