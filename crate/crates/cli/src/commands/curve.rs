use std::path::PathBuf;

use clap::Args;
use stalebayes_core::{DecayModel, Result};

use crate::fsio::{guard_overwrite, parse_hours, write_atomic};

#[derive(Args)]
pub struct CurveArgs {
    /// Decay rate in 1/hours.
    #[arg(long)]
    lambda: f64,
    /// Long-run marginal the belief fades toward.
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    /// The observed value whose belief is tabulated.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    observed: bool,
    /// Largest observation age to tabulate (hours; h/m suffixes allowed).
    #[arg(long, value_parser = parse_hours, default_value = "24h")]
    t_max: f64,
    /// Number of equal steps between 0 and --t-max.
    #[arg(long, default_value_t = 240)]
    steps: usize,
    /// Output CSV path; omitted means stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite an existing output file.
    #[arg(long)]
    force: bool,
}

pub fn run(args: CurveArgs) -> Result<i32> {
    let model = DecayModel::new(args.lambda, args.p)?;
    let points = model.decay_curve(args.observed, args.t_max, args.steps)?;
    let mut csv = String::from("t,probability\n");
    for (t, prob) in points {
        csv.push_str(&format!("{t},{prob}\n"));
    }
    match &args.out {
        Some(path) => {
            guard_overwrite(path, args.force)?;
            write_atomic(path, &csv)?;
            println!("wrote decay curve to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(0)
}
