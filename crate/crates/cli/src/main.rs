//! `stalebayes` — staleness-aware inference from the command line.
//!
//! Subcommands: `gen` (synthetic datasets), `infer` (posterior over the decay
//! rate), `curve` (belief-vs-delay tables), `query` (one delayed graph
//! lookup), `simulate` (the two-node network), `report` (the self-checking
//! bundle).
//!
//! Exit codes: 0 success, 1 failed checks or audit, 2 bad arguments,
//! 3 I/O, file-format, or graph-content problems, 4 degenerate inference.

use clap::Parser;
use stalebayes_core::Error;

mod commands;
mod fsio;

#[derive(Parser)]
#[command(name = "stalebayes", version, about = "Delay-aware inference toolkit")]
enum Cli {
    /// Generate a synthetic decision dataset (JSON lines).
    Gen(commands::gen::GenArgs),
    /// Infer the posterior over the decay rate from a dataset.
    Infer(commands::infer::InferArgs),
    /// Tabulate decayed belief against observation age (CSV).
    Curve(commands::curve::CurveArgs),
    /// Evaluate one delayed query against a graph.
    Query(commands::query::QueryArgs),
    /// Run the sensor/actuator network simulation.
    Simulate(commands::simulate::SimulateArgs),
    /// Generate the full diagnostic report and self-check it.
    Report(commands::report::ReportArgs),
}

fn main() {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> stalebayes_core::Result<i32> {
    match cli {
        Cli::Gen(args) => commands::gen::run(args),
        Cli::Infer(args) => commands::infer::run(args),
        Cli::Curve(args) => commands::curve::run(args),
        Cli::Query(args) => commands::query::run(args),
        Cli::Simulate(args) => commands::simulate::run(args),
        Cli::Report(args) => commands::report::run(args),
    }
}

/// Maps library errors onto the documented exit classes: argument-domain
/// problems are usage errors (2, same class clap uses), anything about the
/// filesystem or file contents is 3, and inference collapse is 4.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Parse(_) | Error::Graph(_) | Error::EmptyDataset => 3,
        Error::DegenerateWeights { .. } => 4,
        _ => 2,
    }
}
