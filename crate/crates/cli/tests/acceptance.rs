//! The toolkit's acceptance gate: one test per promised behavior, spanning
//! the decay algebra, the delta-clock bookkeeping, both posterior backends,
//! the simulator, and the report pipeline. Each test prints a PASS line so
//! `cargo test -p stalebayes-cli --test acceptance -- --nocapture` reads as
//! a checklist; tolerances and time budgets are pinned inline.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stalebayes_core::datagen::canonical_cases;
use stalebayes_core::inference::{
    count_on, counts_log_likelihood, record_marginal_log_likelihood, HISTOGRAM_BINS,
};
use stalebayes_core::{
    no_heartbeat_audit, posterior_importance, posterior_oracle, run_scenario, total_variation,
    BinaryObservation, DecayModel, GenerativeConfig, LatencyModel, LocalClock, ScenarioConfig,
    SprinklerRecord, StampedEvent,
};

/// Closed-form belief in a true observation after 10 h at rate 0.25/h with
/// marginal 0.2, frozen from a 30-digit evaluation of
/// e^-2.5 + (1 - e^-2.5) * 0.2.
const BELIEF_TRUE_10H: f64 = 0.265_667_998_899_119;

#[test]
fn a01_decayed_belief_matches_the_closed_form_on_random_inputs() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let lambda = rng.gen::<f64>() * 5.0;
        let p = rng.gen::<f64>();
        let t = rng.gen::<f64>() * 50.0;
        let value = rng.gen::<bool>();
        let model = DecayModel::new(lambda, p).unwrap();
        let obs = BinaryObservation::new(value, t).unwrap();

        let s = if value { 1.0 } else { 0.0 };
        let e = (-lambda * t).exp();
        let reference = e * s + (1.0 - e) * p;
        let got = model.true_probability(obs);
        assert!(
            (got - reference).abs() <= 1e-12,
            "rate {lambda}, marginal {p}, age {t}, value {value}: {got} vs {reference}"
        );
        let sum = got + model.false_probability(obs);
        assert!((sum - 1.0).abs() <= f64::EPSILON, "complement broke: {sum}");

        let fresh = model.true_probability(BinaryObservation::new(value, 0.0).unwrap());
        assert_eq!(fresh, s, "age zero must reproduce the observation");
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget 1 s");
    println!(
        "PASS decayed belief matches e^-kt * s + (1 - e^-kt) * p on 10000 random inputs \
         in {elapsed:?} (tol 1e-12, budget 1 s)"
    );
}

#[test]
fn a02_decay_curve_hits_certainty_at_zero_and_the_frozen_10h_value() {
    let model = DecayModel::new(0.25, 0.2).unwrap();
    let curve = model.decay_curve(true, 24.0, 240).unwrap();
    assert_eq!(curve.len(), 241);
    assert_eq!(curve[0], (0.0, 1.0), "fresh true observation must be believed outright");
    let (t, belief) = curve[100];
    assert_eq!(t, 10.0);
    assert!(
        (belief - BELIEF_TRUE_10H).abs() <= 1e-5,
        "belief at 10 h: {belief} vs frozen {BELIEF_TRUE_10H}"
    );
    println!(
        "PASS decay curve is exactly 1 at age 0 and {belief:.10} at age 10 h, \
         within 1e-5 of the frozen closed-form value {BELIEF_TRUE_10H:.10}"
    );
}

#[test]
fn a03_lazy_delay_matches_brute_force_accumulation_over_random_hop_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..1000 {
        let hops = rng.gen_range(0..=10);
        let mut clock = LocalClock::new();
        let event = StampedEvent::stamp_local("sensor", "humidity", true, &clock);
        let t_meas = clock.now_h();

        let mut event = event;
        let mut estimate_total = 0.0;
        for _ in 0..hops {
            // Dwell at this node, then forward with some latency estimate.
            let dwell = rng.gen::<f64>() * 4.0;
            let estimate = rng.gen::<f64>() * 2.0;
            clock.advance_to(clock.now_h() + dwell).unwrap();
            event = event.forward(&clock, estimate, &clock).unwrap();
            estimate_total += estimate;
        }
        let wait = rng.gen::<f64>() * 24.0;
        clock.advance_to(clock.now_h() + wait).unwrap();

        let lazy = event.current_delay(&clock).unwrap();
        let brute = (clock.now_h() - t_meas) + estimate_total;
        assert!(
            (lazy - brute).abs() <= 1e-9,
            "case {case}: lazy {lazy} vs brute-force {brute}"
        );
    }
    println!(
        "PASS lazily evaluated delay equals wall age plus stamped estimates over \
         1000 random chains of up to 10 hops (tol 1e-9)"
    );
}

#[test]
fn a04_fresh_data_pins_the_rate_near_zero() {
    let cfg = GenerativeConfig::default();
    let dataset = canonical_cases()[0].generate();
    let started = Instant::now();
    let posterior = posterior_oracle(&dataset, &cfg, 2000).unwrap();
    let elapsed = started.elapsed();
    let (mean, ci_hi) = (posterior.mean(), posterior.ci90().1);
    assert!(mean < 0.02, "mean {mean} should be under 0.02");
    assert!(ci_hi < 0.05, "ci90 high {ci_hi} should be under 0.05");
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}, budget 5 s");
    println!(
        "PASS instantly-consistent decisions pin the rate near zero: grid mean {mean:.6} \
         (max 0.02), ci90 high {ci_hi:.6} (max 0.05), computed in {elapsed:?} (budget 5 s)"
    );
}

#[test]
fn a05_posterior_mean_rises_with_the_staleness_signature() {
    let cfg = GenerativeConfig::default();
    let means: Vec<f64> = canonical_cases()
        .iter()
        .map(|spec| posterior_oracle(&spec.generate(), &cfg, 2000).unwrap().mean())
        .collect();
    assert!(
        means[0] < means[1] && means[1] < means[2],
        "means not ordered: {means:?}"
    );
    println!(
        "PASS posterior mean rises as decisions drift toward the marginal: \
         {:.6} < {:.6} < {:.6}",
        means[0], means[1], means[2]
    );
}

#[test]
fn a06_heavily_drifted_data_concentrates_mass_on_fast_rates() {
    let cfg = GenerativeConfig::default();
    let dataset = canonical_cases()[2].generate();
    let posterior = posterior_oracle(&dataset, &cfg, 2000).unwrap();
    let mass = posterior.mass_above(0.2);
    assert!(mass >= 0.9, "mass above 0.2 is only {mass}");
    println!(
        "PASS near-marginal decisions put posterior mass {mass:.4} on rates above 0.2 \
         (min 0.9)"
    );
}

#[test]
fn a07_sampler_agrees_with_the_grid_on_every_canonical_dataset() {
    let cfg = GenerativeConfig::default();
    for (idx, spec) in canonical_cases().into_iter().enumerate() {
        let dataset = spec.generate();
        let oracle = posterior_oracle(&dataset, &cfg, 2000).unwrap();
        let started = Instant::now();
        let sampler = posterior_importance(&dataset, &cfg, 50_000, 42 + idx as u64).unwrap();
        let elapsed = started.elapsed();

        let mean_gap = (oracle.mean() - sampler.mean()).abs();
        let tv = total_variation(
            &oracle.histogram(HISTOGRAM_BINS),
            &sampler.histogram(HISTOGRAM_BINS),
        );
        assert!(mean_gap <= 0.02, "case {}: mean gap {mean_gap}", idx + 1);
        assert!(tv <= 0.1, "case {}: total variation {tv}", idx + 1);
        assert!(
            elapsed < Duration::from_secs(30),
            "case {}: took {elapsed:?}, budget 30 s",
            idx + 1
        );
        println!(
            "PASS 50000-particle sampler agrees with the 2000-point grid on case {}: \
             |mean gap| {mean_gap:.5} (tol 0.02), total variation {tv:.4} (tol 0.1), \
             sampled in {elapsed:?} (budget 30 s)",
            idx + 1
        );
    }
}

#[test]
fn a08_collapsed_likelihood_equals_the_per_record_product() {
    let cfg = GenerativeConfig::default();
    let dataset = canonical_cases()[1].generate();
    assert_eq!(dataset.len(), 1000);
    let counts = count_on(&dataset);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let lambda = rng.gen::<f64>();
        let collapsed = counts_log_likelihood(lambda, counts, &cfg).unwrap();
        let product: f64 = dataset
            .iter()
            .map(|&r| record_marginal_log_likelihood(lambda, r, &cfg).unwrap())
            .sum();
        let rel = (collapsed - product).abs() / product.abs().max(1.0);
        assert!(
            rel <= 1e-9,
            "rate {lambda}: collapsed {collapsed} vs product {product} (rel {rel})"
        );
    }
    println!(
        "PASS on-count collapse reproduces the 1000-record log-likelihood product at \
         20 random rates (rel tol 1e-9)"
    );
}

#[test]
fn a09_posterior_recovers_the_rate_that_generated_a_simulation() {
    // Deterministically simulated decisions, fed back through the grid
    // posterior, must land on the generating rate.
    let mut means = Vec::new();
    for lambda in [0.0, 0.1, 0.25] {
        let cfg = ScenarioConfig { lambda_delta: lambda, ..ScenarioConfig::default() };
        let run = run_scenario(&cfg).unwrap();
        assert_eq!(run.records.len(), 1000);
        let posterior =
            posterior_oracle(&run.records, &cfg.generative_config(), 2000).unwrap();
        let mean = posterior.mean();
        assert!(
            (mean - lambda).abs() <= 0.05,
            "generating rate {lambda}: recovered {mean}"
        );
        means.push(mean);
    }
    assert!(means[0] < means[1] && means[1] < means[2], "not ordered: {means:?}");

    // The no-decay, no-latency corner is exact: never on at noon, always on
    // at midnight.
    let corner = ScenarioConfig {
        lambda_delta: 0.0,
        latency: LatencyModel::Zero,
        ..ScenarioConfig::default()
    };
    let run = run_scenario(&corner).unwrap();
    assert!(run
        .records
        .iter()
        .all(|r| r == &SprinklerRecord { s_noon: false, s_night: true }));

    println!(
        "PASS simulated networks hand their decay rate back through inference: \
         recovered means {:.5}, {:.5}, {:.5} for rates 0, 0.1, 0.25 (tol 0.05), \
         and the no-decay/no-latency corner is exactly (off, on) every day",
        means[0], means[1], means[2]
    );
}

#[test]
fn a10_every_transmission_is_provoked_and_suppression_works() {
    for seed in [7, 8, 9] {
        let cfg = ScenarioConfig { days: 200, seed, ..ScenarioConfig::default() };
        let run = run_scenario(&cfg).unwrap();
        assert!(no_heartbeat_audit(&run.trace), "seed {seed}: audit failed");
        assert_eq!(run.stats.suppressions, 0, "alternating values never suppress");
    }

    let muted = ScenarioConfig { days: 200, epsilon: 1.0, ..ScenarioConfig::default() };
    let run = run_scenario(&muted).unwrap();
    assert!(no_heartbeat_audit(&run.trace));
    assert_eq!(run.stats.deliveries, 1, "threshold 1 lets only the first send through");
    assert_eq!(run.stats.suppressions, run.stats.measurements - 1);

    println!(
        "PASS traces stay reactive: the audit clears 3 canonical runs, and a change \
         threshold of 1 suppresses everything after the first delivery"
    );
}

#[test]
fn a11_report_is_fast_deterministic_and_flags_weak_samplers() {
    let bin = env!("CARGO_BIN_EXE_stalebayes");
    let dir = tempfile::tempdir().unwrap();

    let timed_report = |out_dir: &str, particles: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.current_dir(dir.path()).args(["report", "--out-dir", out_dir]);
        if let Some(n) = particles {
            cmd.args(["--particles", n]);
        }
        let started = Instant::now();
        let out = cmd.output().expect("report runs");
        (out, started.elapsed())
    };

    let (first, elapsed_first) = timed_report("full-a", None);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(
        elapsed_first < Duration::from_secs(60),
        "took {elapsed_first:?}, budget 60 s"
    );
    let text = String::from_utf8(first.stdout).unwrap();
    let passes = text.lines().filter(|l| l.starts_with("PASS")).count();
    assert!(passes >= 7, "expected at least 7 PASS lines, got {passes}:\n{text}");
    assert!(!text.contains("FAIL"), "unexpected FAIL:\n{text}");
    assert!(!text.contains("WARN"), "unexpected WARN at full particle count:\n{text}");

    let (second, _) = timed_report("full-b", None);
    assert_eq!(second.status.code(), Some(0));
    for entry in std::fs::read_dir(dir.path().join("full-a")).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(dir.path().join("full-a").join(&name)).unwrap();
        let b = std::fs::read(dir.path().join("full-b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs between identical runs");
    }
    let n_files = std::fs::read_dir(dir.path().join("full-a")).unwrap().count();
    assert_eq!(n_files, 11, "3 datasets + 6 posteriors + curve + summary");

    let (starved, _) = timed_report("starved", Some("100"));
    assert_eq!(starved.status.code(), Some(0), "warnings must not fail the run");
    let text = String::from_utf8(starved.stdout).unwrap();
    assert!(
        text.lines().any(|l| l.starts_with("WARN")),
        "100 particles should be too few to agree everywhere:\n{text}"
    );

    assert_eq!(summary_status(&dir.path().join("full-a/summary.json")), "PASS");
    assert_eq!(summary_status(&dir.path().join("starved/summary.json")), "WARN");

    println!(
        "PASS report finished in {elapsed_first:?} (budget 60 s) with {passes} checks, \
         byte-identical across reruns, and a 100-particle run degrades to WARN without \
         failing"
    );
}

fn summary_status(path: &Path) -> String {
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["status"].as_str().expect("status is a string").to_owned()
}
