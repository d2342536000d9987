//! `opuc`: build, verify, reconstruct and export finite OPUC systems.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 invalid input,
//! 3 reconstruction failure, 4 I/O error.

mod commands;
mod error;
mod json;
mod source;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CheckArgs, ExportArgs, GenerateArgs, Outcome, ReconstructArgs};

#[derive(Debug, Parser)]
#[command(name = "opuc", version, about = "Finite orthogonal polynomials on the unit circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a system and print the requested artifacts as JSON.
    Generate(GenerateArgs),
    /// Verify residuals; exit 1 if any exceeds its tolerance.
    Check(CheckArgs),
    /// Recover a persymmetric Verblunsky sequence from its spectrum.
    Reconstruct(ReconstructArgs),
    /// Write nodes and weights as CSV, or the full document as JSON.
    Export(ExportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Check(args) => commands::check(args),
        Command::Reconstruct(args) => commands::reconstruct(args),
        Command::Export(args) => commands::export(args),
    };
    match result {
        Ok(Outcome { document, passed }) => {
            if let Some(doc) = document {
                println!("{}", json::to_canonical_string(&doc));
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("opuc: verification failed: residuals exceed tolerance");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("opuc: {e}");
            e.exit_code()
        }
    }
}
