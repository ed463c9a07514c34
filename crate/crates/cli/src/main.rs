//! `ilb-evolve`: run evolutions, chain and solver checks, and benchmarks.

mod bench;
mod check;
mod evolve;
mod failure;
mod runspec;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "ilb-evolve",
    version,
    about = "Evolution maps for projective-limit Lie groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve ẏ = γ(t).y, y(0) = e and write the trajectory and report.
    Evolve(evolve::EvolveArgs),
    /// Validate chain axioms and solver invariants on an instance.
    Check(check::CheckArgs),
    /// Tabulate control mass, N, Picard iterations and wall time.
    Bench(bench::BenchArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return Failure::Usage(e.kind().to_string()).report();
        }
    };
    let result = match &cli.command {
        Command::Evolve(a) => evolve::run(a),
        Command::Check(a) => check::run(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
