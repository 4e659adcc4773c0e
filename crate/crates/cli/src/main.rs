use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dcj_cli::{cmd_report, cmd_simulate, cmd_stationary, cmd_validate, cmd_verify, init_threads, Options};

/// Distinguished-customer random walks in queueing networks: exact
/// stationary laws, symmetry checks, and simulation.
///
/// Set DCJ_THREADS to cap parallelism.
#[derive(Parser, Debug)]
#[command(name = "dcj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every symmetry condition and subcriticality.
    Validate(Options),
    /// Write product-form weights and probabilities as CSV.
    Stationary(Options),
    /// Detailed balance on the box and the linear-solve oracle.
    Verify(Options),
    /// Exact-clock simulation with occupation measures.
    Simulate(Options),
    /// Validate, stationary and verify combined.
    Report(Options),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("DCJ_THREADS").ok();
    let result = init_threads(threads.as_deref()).and_then(|()| match &cli.command {
        Command::Validate(o) => cmd_validate(o),
        Command::Stationary(o) => cmd_stationary(o),
        Command::Verify(o) => cmd_verify(o),
        Command::Simulate(o) => cmd_simulate(o),
        Command::Report(o) => cmd_report(o),
    });
    match result {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
