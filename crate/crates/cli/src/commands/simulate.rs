use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use stalebayes_core::inference::dataset_to_jsonl;
use stalebayes_core::{no_heartbeat_audit, run_scenario, trace_to_jsonl, Result, ScenarioConfig};

use crate::fsio::{guard_overwrite, read_to_string, write_atomic};

#[derive(Args)]
pub struct SimulateArgs {
    /// Scenario description (JSON); omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configured number of simulated days.
    #[arg(long)]
    days: Option<u32>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the full event trace (JSON lines).
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Write the per-day decision dataset (JSON lines).
    #[arg(long)]
    data_out: Option<PathBuf>,
    /// Verify that every delivery was provoked by a measurement; a failure
    /// exits with status 1.
    #[arg(long)]
    audit_reactive: bool,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

pub fn run(args: SimulateArgs) -> Result<i32> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::from_json(&read_to_string(path)?)?,
        None => ScenarioConfig::default(),
    };
    if let Some(days) = args.days {
        cfg.days = days;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let run = run_scenario(&cfg)?;

    if let Some(path) = &args.trace_out {
        guard_overwrite(path, args.force)?;
        write_atomic(path, &trace_to_jsonl(&run.trace))?;
    }
    if let Some(path) = &args.data_out {
        guard_overwrite(path, args.force)?;
        write_atomic(path, &dataset_to_jsonl(&run.records))?;
    }

    let audit = if args.audit_reactive {
        Some(no_heartbeat_audit(&run.trace))
    } else {
        None
    };
    let out = json!({
        "days": cfg.days,
        "seed": cfg.seed,
        "stats": run.stats,
        "audit": audit.map(|ok| if ok { "pass" } else { "fail" }),
    });
    println!("{out}");
    Ok(if audit == Some(false) { 1 } else { 0 })
}
