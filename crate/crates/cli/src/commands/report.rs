use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;
use stalebayes_core::datagen::canonical_cases;
use stalebayes_core::inference::{dataset_to_jsonl, posterior_to_csv, HISTOGRAM_BINS};
use stalebayes_core::{
    effective_sample_size, posterior_importance, posterior_oracle, total_variation, DecayModel,
    GenerativeConfig, Result,
};

use crate::fsio::write_atomic;

// Check tolerances. The reference value is the closed-form belief in a
// true observation after 10 h at rate 0.25/h and marginal 0.2.
const DECAY_REF_AT_10H: f64 = 0.265_667_998_899_119;
const DECAY_TOL: f64 = 1e-5;
const FRESH_MEAN_MAX: f64 = 0.02;
const FRESH_CI_HI_MAX: f64 = 0.05;
const HEAVY_RATE_THRESHOLD: f64 = 0.2;
const HEAVY_MASS_MIN: f64 = 0.9;
const AGREE_MEAN_TOL: f64 = 0.02;
const AGREE_TV_TOL: f64 = 0.1;

#[derive(Args)]
pub struct ReportArgs {
    /// Where the artifact files go.
    #[arg(long, env = "STALEBAYES_OUT_DIR", default_value = "report")]
    out_dir: PathBuf,
    /// Particles for the sampling backend.
    #[arg(long, default_value_t = 50_000)]
    particles: usize,
    /// Grid points for the quadrature backend.
    #[arg(long, default_value_t = 2000)]
    grid: usize,
    /// Base seed; case k samples with seed + k - 1.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Warn => "WARN",
            Status::Fail => "FAIL",
        })
    }
}

struct Check {
    status: Status,
    text: String,
}

fn check(ok: bool, on_bad: Status, text: String) -> Check {
    Check { status: if ok { Status::Pass } else { on_bad }, text }
}

pub fn run(args: ReportArgs) -> Result<i32> {
    let dir: &Path = &args.out_dir;
    let mut checks: Vec<Check> = Vec::new();

    // Belief-vs-age curve for the canonical rate, checked against the
    // closed form at both ends.
    let model = DecayModel::new(0.25, 0.2)?;
    let curve = model.decay_curve(true, 24.0, 240)?;
    let mut csv = String::from("t,probability\n");
    for (t, prob) in &curve {
        csv.push_str(&format!("{t},{prob}\n"));
    }
    write_atomic(&dir.join("decay_curve.csv"), &csv)?;
    let at_zero = curve[0].1;
    let at_ten = curve[100].1; // 240 steps over 24 h puts t = 10 at index 100
    checks.push(check(
        at_zero == 1.0 && (at_ten - DECAY_REF_AT_10H).abs() <= DECAY_TOL,
        Status::Fail,
        format!(
            "decay curve: belief 1 at age 0 and {at_ten:.10} at age 10 h \
             (reference {DECAY_REF_AT_10H:.10}, tolerance {DECAY_TOL:e})"
        ),
    ));

    // Both posterior backends on each canonical dataset.
    let cfg = GenerativeConfig::default();
    let mut case_views = Vec::new();
    let mut oracle_means = Vec::new();
    for (idx, spec) in canonical_cases().into_iter().enumerate() {
        let name = format!("case{}", idx + 1);
        let dataset = spec.generate();
        write_atomic(&dir.join(format!("{name}_dataset.jsonl")), &dataset_to_jsonl(&dataset))?;

        let oracle = posterior_oracle(&dataset, &cfg, args.grid)?;
        write_atomic(&dir.join(format!("{name}_oracle.csv")), &posterior_to_csv(&oracle))?;
        let sampler =
            posterior_importance(&dataset, &cfg, args.particles, args.seed + idx as u64)?;
        write_atomic(&dir.join(format!("{name}_sampler.csv")), &posterior_to_csv(&sampler))?;

        let mean_gap = (oracle.mean() - sampler.mean()).abs();
        let tv = total_variation(
            &oracle.histogram(HISTOGRAM_BINS),
            &sampler.histogram(HISTOGRAM_BINS),
        );
        checks.push(check(
            mean_gap <= AGREE_MEAN_TOL && tv <= AGREE_TV_TOL,
            Status::Warn,
            format!(
                "{name} backend agreement: |mean gap| {mean_gap:.4} (tol {AGREE_MEAN_TOL}), \
                 total variation {tv:.4} (tol {AGREE_TV_TOL})"
            ),
        ));

        oracle_means.push(oracle.mean());
        case_views.push((name, dataset.len(), oracle, sampler, mean_gap, tv));
    }

    // Posterior shape checks against the construction of the cases:
    // fresh data pins the rate near zero, heavier decay pushes it up.
    let fresh = &case_views[0].2;
    checks.push(check(
        fresh.mean() < FRESH_MEAN_MAX && fresh.ci90().1 < FRESH_CI_HI_MAX,
        Status::Fail,
        format!(
            "case1: oracle mean {:.6} (max {FRESH_MEAN_MAX}), ci90 high {:.6} (max {FRESH_CI_HI_MAX})",
            fresh.mean(),
            fresh.ci90().1
        ),
    ));
    checks.push(check(
        oracle_means[0] < oracle_means[1] && oracle_means[1] < oracle_means[2],
        Status::Fail,
        format!(
            "ordering: oracle means rise with staleness ({:.6} < {:.6} < {:.6})",
            oracle_means[0], oracle_means[1], oracle_means[2]
        ),
    ));
    let heavy_mass = case_views[2].2.mass_above(HEAVY_RATE_THRESHOLD);
    checks.push(check(
        heavy_mass >= HEAVY_MASS_MIN,
        Status::Fail,
        format!(
            "case3: posterior mass on rates above {HEAVY_RATE_THRESHOLD} is \
             {heavy_mass:.4} (min {HEAVY_MASS_MIN})"
        ),
    ));

    let overall = checks.iter().map(|c| c.status).fold(Status::Pass, |acc, s| {
        match (acc, s) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Warn, _) | (_, Status::Warn) => Status::Warn,
            _ => Status::Pass,
        }
    });

    let summary = json!({
        "decay": {
            "at_zero": at_zero,
            "at_10h": at_ten,
            "reference_at_10h": DECAY_REF_AT_10H,
        },
        "cases": case_views.iter().map(|(name, n, oracle, sampler, mean_gap, tv)| {
            json!({
                "name": name,
                "n_records": n,
                "oracle": {
                    "mean": oracle.mean(),
                    "ci90_lo": oracle.ci90().0,
                    "ci90_hi": oracle.ci90().1,
                    "mass_above_0_2": oracle.mass_above(HEAVY_RATE_THRESHOLD),
                },
                "sampler": {
                    "mean": sampler.mean(),
                    "ci90_lo": sampler.ci90().0,
                    "ci90_hi": sampler.ci90().1,
                    "ess": effective_sample_size(sampler.weights()),
                },
                "agreement": {
                    "mean_abs_diff": mean_gap,
                    "total_variation": tv,
                },
            })
        }).collect::<Vec<_>>(),
        "checks": checks.iter().map(|c| {
            json!({ "status": c.status.to_string(), "text": c.text })
        }).collect::<Vec<_>>(),
        "status": overall.to_string(),
        "settings": {
            "grid": args.grid,
            "particles": args.particles,
            "seed": args.seed,
        },
    });
    write_atomic(
        &dir.join("summary.json"),
        &serde_json::to_string_pretty(&summary).expect("summary serialization cannot fail"),
    )?;

    for c in &checks {
        println!("{} {}", c.status, c.text);
    }
    println!("report written to {}", dir.display());
    Ok(if overall == Status::Fail { 1 } else { 0 })
}
