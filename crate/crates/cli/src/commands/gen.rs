use std::path::PathBuf;

use clap::{ArgGroup, Args};
use stalebayes_core::inference::dataset_to_jsonl;
use stalebayes_core::{CaseSpec, Error, Result};

use crate::fsio::{guard_overwrite, write_atomic};

#[derive(Args)]
#[command(group = ArgGroup::new("source").required(true).args(["case", "p_noon"]))]
pub struct GenArgs {
    /// Canonical case number (1: fresh, 2: moderate decay, 3: heavy decay).
    #[arg(long, conflicts_with_all = ["p_noon", "p_night"])]
    case: Option<u8>,
    /// Probability that the noon decision is "on" (custom dataset).
    #[arg(long, requires = "p_night")]
    p_noon: Option<f64>,
    /// Probability that the midnight decision is "on" (custom dataset).
    #[arg(long, requires = "p_noon")]
    p_night: Option<f64>,
    /// Number of day records; defaults to the case's canonical size.
    #[arg(long)]
    n: Option<usize>,
    /// RNG seed; defaults to the case's canonical seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Overwrite an existing output file.
    #[arg(long)]
    force: bool,
}

pub fn run(args: GenArgs) -> Result<i32> {
    let base = match args.case {
        Some(1) => CaseSpec::case1(),
        Some(2) => CaseSpec::case2(),
        Some(3) => CaseSpec::case3(),
        Some(other) => {
            return Err(Error::InvalidParameter {
                name: "case",
                value: other as f64,
                reason: "only cases 1, 2 and 3 exist",
            })
        }
        None => {
            // The arg group guarantees both probabilities are present here.
            let p_noon = args.p_noon.expect("group requires p_noon");
            let p_night = args.p_night.expect("requires p_night");
            CaseSpec::new(p_noon, p_night, 1000, 0)?
        }
    };
    let spec = CaseSpec::new(
        base.p_noon,
        base.p_night,
        args.n.unwrap_or(base.n_records),
        args.seed.unwrap_or(base.seed),
    )?;
    guard_overwrite(&args.out, args.force)?;
    let records = spec.generate();
    write_atomic(&args.out, &dataset_to_jsonl(&records))?;
    println!("wrote {} records to {}", records.len(), args.out.display());
    Ok(0)
}
