use std::path::PathBuf;

use clap::{Args, ValueEnum};
use stalebayes_core::inference::{parse_dataset, posterior_to_csv, summary_json};
use stalebayes_core::{posterior_importance, posterior_oracle, GenerativeConfig, Result};

use crate::fsio::{guard_overwrite, read_to_string, write_atomic};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    /// Dense-grid quadrature over the rate prior.
    Oracle,
    /// Likelihood-weighting particle sampler.
    Is,
}

#[derive(Args)]
pub struct InferArgs {
    /// Dataset to fit (JSON lines of {"s_noon": …, "s_night": …}).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = Backend::Oracle)]
    backend: Backend,
    /// Grid points for the oracle backend.
    #[arg(long, default_value_t = 2000)]
    grid: usize,
    /// Particles for the sampling backend.
    #[arg(long, default_value_t = 50_000)]
    particles: usize,
    /// Seed for the sampling backend.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Long-run humidity probability assumed by the generative story.
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    /// Write the full posterior as CSV (lambda,weight).
    #[arg(long)]
    posterior_out: Option<PathBuf>,
    /// Write the summary JSON (also printed to stdout).
    #[arg(long)]
    summary_out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

pub fn run(args: InferArgs) -> Result<i32> {
    let cfg = GenerativeConfig { humidity_prior_p: args.p, ..GenerativeConfig::default() };
    let records = parse_dataset(&read_to_string(&args.data)?)?;
    let (result, backend) = match args.backend {
        Backend::Oracle => (posterior_oracle(&records, &cfg, args.grid)?, "oracle"),
        Backend::Is => {
            (posterior_importance(&records, &cfg, args.particles, args.seed)?, "is")
        }
    };
    let summary = summary_json(&result, records.len(), backend);
    if let Some(path) = &args.posterior_out {
        guard_overwrite(path, args.force)?;
        write_atomic(path, &posterior_to_csv(&result))?;
    }
    if let Some(path) = &args.summary_out {
        guard_overwrite(path, args.force)?;
        write_atomic(path, &summary)?;
    }
    println!("{summary}");
    Ok(0)
}
