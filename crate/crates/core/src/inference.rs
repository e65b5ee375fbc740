//! Posterior inference for the staleness rate.
//!
//! The generative story, per recorded day: humidity is measured once in a
//! morning window (reading `true`) and once in an evening window (reading
//! `false`); an actuator queries the softened humidity at noon and at
//! midnight and switches on with the *inverse* of the softened value. A
//! dataset is the list of (s_noon, s_night) switch decisions, and the
//! unknown is the decay rate `lambda` with a uniform prior.
//!
//! Two backends compute the posterior over `lambda`:
//!
//! * [`posterior_importance`] — likelihood weighting: sample `lambda` and the
//!   per-record measurement times from their priors, weight by the Bernoulli
//!   likelihood of the recorded decisions.
//! * [`posterior_oracle`] — deterministic grid quadrature over the
//!   measurement times. Averaging the decay factor over a uniform window has
//!   a closed form, and because each decision is Bernoulli the per-record
//!   likelihood collapses to counts: only `#(s_noon=true)` and
//!   `#(s_night=true)` matter.
//!
//! Both backends agree by construction; the sampler converges on the oracle
//! as the particle count grows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One recorded day: the actuator's noon and midnight decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SprinklerRecord {
    pub s_noon: bool,
    pub s_night: bool,
}

/// Closed interval of admissible rates, with a flat prior over it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformPrior {
    pub lo: f64,
    pub hi: f64,
}

impl UniformPrior {
    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lo && lambda <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Parameters of the generative story. Hours are relative to day start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerativeConfig {
    /// Long-run probability that it is humid; also the decay fade-out target.
    pub humidity_prior_p: f64,
    /// Window of the morning measurement and the value it reads.
    pub morning_window: (f64, f64),
    pub morning_humidity: bool,
    /// When the noon decision is made.
    pub noon_query_h: f64,
    /// Window of the evening measurement and the value it reads.
    pub evening_window: (f64, f64),
    pub evening_humidity: bool,
    /// When the midnight decision is made.
    pub midnight_query_h: f64,
    /// Flat prior over the decay rate.
    pub lambda_prior: UniformPrior,
}

impl Default for GenerativeConfig {
    fn default() -> Self {
        Self {
            humidity_prior_p: 0.2,
            morning_window: (0.0, 3.0),
            morning_humidity: true,
            noon_query_h: 12.0,
            evening_window: (12.0, 15.0),
            evening_humidity: false,
            midnight_query_h: 24.0,
            lambda_prior: UniformPrior { lo: 0.0, hi: 1.0 },
        }
    }
}

impl GenerativeConfig {
    pub fn validate(&self) -> Result<()> {
        let window = |name: &str, (lo, hi): (f64, f64), query: f64| -> Result<()> {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidConfig(format!(
                    "{name} window [{lo}, {hi}] is not a proper interval"
                )));
            }
            if !query.is_finite() || hi > query {
                return Err(Error::InvalidConfig(format!(
                    "{name} window [{lo}, {hi}] must end before its query at {query}"
                )));
            }
            Ok(())
        };
        window("morning", self.morning_window, self.noon_query_h)?;
        window("evening", self.evening_window, self.midnight_query_h)?;
        if !self.humidity_prior_p.is_finite() || !(0.0..=1.0).contains(&self.humidity_prior_p) {
            return Err(Error::InvalidConfig(format!(
                "humidity_prior_p {} is not a probability",
                self.humidity_prior_p
            )));
        }
        let prior = self.lambda_prior;
        if !prior.lo.is_finite() || !prior.hi.is_finite() || prior.lo < 0.0 || prior.lo >= prior.hi
        {
            return Err(Error::InvalidConfig(format!(
                "lambda prior [{}, {}] must be a non-negative proper interval",
                prior.lo, prior.hi
            )));
        }
        Ok(())
    }
}

/// On/off probability of the decision given a single measurement `humidity`
/// that is `delay_h` stale: the softened humidity is
/// `h = e^(-lambda*delay) * humidity + (1 - e^(-lambda*delay)) * p` and the
/// decision is on with probability `1 - h`. Returns `(on, off)` computed on
/// separate, cancellation-free paths.
fn per_time_on_off(lambda: f64, humidity: bool, p: f64, delay_h: f64) -> (f64, f64) {
    let e = (-lambda * delay_h).exp();
    let one_minus_e = -(-lambda * delay_h).exp_m1();
    if humidity {
        ((1.0 - p) * one_minus_e, p + (1.0 - p) * e)
    } else {
        ((1.0 - p) + p * e, p * one_minus_e)
    }
}

/// Mean of `e^(-lambda * (t_query - t))` for `t` uniform on `window` — the
/// window-averaged decay factor. Exact limit 1 at `lambda = 0`.
fn window_mean_decay(lambda: f64, window: (f64, f64), t_query: f64) -> f64 {
    if lambda == 0.0 {
        return 1.0;
    }
    let w = window.1 - window.0;
    // e^(-lambda (T - b)) * (1 - e^(-lambda w)) / (lambda w), via exp_m1 so
    // small rates lose nothing to cancellation.
    (-lambda * (t_query - window.1)).exp() * (-(-lambda * w).exp_m1()) / (lambda * w)
}

/// `(on, off)` for one decision with the measurement time averaged out over
/// its window. Linearity in the decay factor makes this exact.
fn window_on_off(lambda: f64, humidity: bool, p: f64, window: (f64, f64), t_query: f64) -> (f64, f64) {
    let e_bar = window_mean_decay(lambda, window, t_query);
    if humidity {
        ((1.0 - p) * (1.0 - e_bar), p + (1.0 - p) * e_bar)
    } else {
        ((1.0 - p) + p * e_bar, p * (1.0 - e_bar))
    }
}

fn marginal_factors(lambda: f64, cfg: &GenerativeConfig) -> ((f64, f64), (f64, f64)) {
    let p = cfg.humidity_prior_p;
    (
        window_on_off(lambda, cfg.morning_humidity, p, cfg.morning_window, cfg.noon_query_h),
        window_on_off(lambda, cfg.evening_humidity, p, cfg.evening_window, cfg.midnight_query_h),
    )
}

/// Probability that the noon and midnight decisions are "on" at rate
/// `lambda`, with the measurement times marginalized over their windows.
///
/// At `lambda = 0` (no decay) this is exactly `(0, 1)` for the default
/// configuration; as `lambda` grows both drift to `1 - p`.
pub fn marginal_on_probabilities(lambda: f64, cfg: &GenerativeConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            reason: "must be finite and non-negative",
        });
    }
    let ((q_noon, _), (q_night, _)) = marginal_factors(lambda, cfg);
    Ok((q_noon, q_night))
}

/// Likelihood of one record given the rate and the two measurement times.
///
/// This is the product of the two decision Bernoullis. The rate must lie in
/// the prior's support and the times in their windows.
pub fn record_likelihood(
    lambda: f64,
    record: SprinklerRecord,
    cfg: &GenerativeConfig,
    t_noon_h: f64,
    t_night_h: f64,
) -> Result<f64> {
    cfg.validate()?;
    if !cfg.lambda_prior.contains(lambda) {
        return Err(Error::OutsidePriorSupport {
            lambda,
            lo: cfg.lambda_prior.lo,
            hi: cfg.lambda_prior.hi,
        });
    }
    let in_window = |t: f64, (lo, hi): (f64, f64)| -> Result<()> {
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfWindow { t_h: t, lo_h: lo, hi_h: hi });
        }
        Ok(())
    };
    in_window(t_noon_h, cfg.morning_window)?;
    in_window(t_night_h, cfg.evening_window)?;
    let p = cfg.humidity_prior_p;
    let (on1, off1) =
        per_time_on_off(lambda, cfg.morning_humidity, p, cfg.noon_query_h - t_noon_h);
    let (on2, off2) =
        per_time_on_off(lambda, cfg.evening_humidity, p, cfg.midnight_query_h - t_night_h);
    let f1 = if record.s_noon { on1 } else { off1 };
    let f2 = if record.s_night { on2 } else { off2 };
    Ok(f1 * f2)
}

/// Log-likelihood of one record with the measurement times averaged out.
pub fn record_marginal_log_likelihood(
    lambda: f64,
    record: SprinklerRecord,
    cfg: &GenerativeConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !cfg.lambda_prior.contains(lambda) {
        return Err(Error::OutsidePriorSupport {
            lambda,
            lo: cfg.lambda_prior.lo,
            hi: cfg.lambda_prior.hi,
        });
    }
    let ((on1, off1), (on2, off2)) = marginal_factors(lambda, cfg);
    let f1 = if record.s_noon { on1 } else { off1 };
    let f2 = if record.s_night { on2 } else { off2 };
    Ok(f1.ln() + f2.ln())
}

/// Sufficient statistics of a dataset: only the "on" counts matter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnCounts {
    pub noon_on: usize,
    pub night_on: usize,
    pub n_records: usize,
}

pub fn count_on(dataset: &[SprinklerRecord]) -> OnCounts {
    OnCounts {
        noon_on: dataset.iter().filter(|r| r.s_noon).count(),
        night_on: dataset.iter().filter(|r| r.s_night).count(),
        n_records: dataset.len(),
    }
}

/// Dataset log-likelihood in collapsed (binomial-counts) form. Identical to
/// summing [`record_marginal_log_likelihood`] over the records; a zero count
/// contributes nothing even where its factor is zero, so `log 0` gridpoints
/// stay well-defined.
pub fn counts_log_likelihood(
    lambda: f64,
    counts: OnCounts,
    cfg: &GenerativeConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !cfg.lambda_prior.contains(lambda) {
        return Err(Error::OutsidePriorSupport {
            lambda,
            lo: cfg.lambda_prior.lo,
            hi: cfg.lambda_prior.hi,
        });
    }
    let ((on1, off1), (on2, off2)) = marginal_factors(lambda, cfg);
    let term = |count: usize, prob: f64| -> f64 {
        if count == 0 {
            0.0
        } else {
            count as f64 * prob.ln()
        }
    };
    Ok(term(counts.noon_on, on1)
        + term(counts.n_records - counts.noon_on, off1)
        + term(counts.night_on, on2)
        + term(counts.n_records - counts.night_on, off2))
}

/// How a posterior was represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosteriorKind {
    /// Equal-spaced grid densities from the quadrature oracle.
    Grid,
    /// Weighted particles from likelihood weighting.
    WeightedSamples,
}

/// A normalized discrete posterior over the rate, with summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorResult {
    kind: PosteriorKind,
    support: Vec<f64>,
    weights: Vec<f64>,
    mean: f64,
    ci90: (f64, f64),
    prior: UniformPrior,
}

impl PosteriorResult {
    /// Normalizes raw log-weights over `support` and computes the summary
    /// statistics. Errors with a degeneracy report when every weight is zero.
    pub fn from_log_weights(
        kind: PosteriorKind,
        support: Vec<f64>,
        log_weights: Vec<f64>,
        prior: UniformPrior,
    ) -> Result<Self> {
        assert_eq!(support.len(), log_weights.len());
        let n = support.len();
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::DegenerateWeights { n_particles: n, ess: 0.0 });
        }
        let mut weights: Vec<f64> = log_weights.iter().map(|lw| (lw - max).exp()).collect();
        let total = kahan_sum(weights.iter().copied());
        for w in &mut weights {
            *w /= total;
        }
        let mean = kahan_sum(weights.iter().zip(&support).map(|(w, l)| w * l));
        let ci90 = weighted_interval_90(&support, &weights);
        Ok(Self { kind, support, weights, mean, ci90, prior })
    }

    pub fn kind(&self) -> PosteriorKind {
        self.kind
    }

    /// Rate values, in construction order (grid order or particle order).
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// Normalized weights aligned with [`support`](Self::support); they sum
    /// to 1 within 1e-12.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Central 90% credible interval from the weighted empirical CDF.
    pub fn ci90(&self) -> (f64, f64) {
        self.ci90
    }

    pub fn prior(&self) -> UniformPrior {
        self.prior
    }

    /// Posterior mass on rates strictly above `threshold`.
    pub fn mass_above(&self, threshold: f64) -> f64 {
        kahan_sum(
            self.support
                .iter()
                .zip(&self.weights)
                .filter(|(l, _)| **l > threshold)
                .map(|(_, w)| *w),
        )
    }

    /// Bin masses over `bins` equal cells spanning the prior support.
    pub fn histogram(&self, bins: usize) -> Vec<f64> {
        let mut masses = vec![0.0; bins];
        let width = self.prior.width();
        for (l, w) in self.support.iter().zip(&self.weights) {
            let idx = (((l - self.prior.lo) / width) * bins as f64) as usize;
            masses[idx.min(bins - 1)] += w;
        }
        masses
    }
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

fn weighted_interval_90(support: &[f64], weights: &[f64]) -> (f64, f64) {
    let mut order: Vec<usize> = (0..support.len()).collect();
    order.sort_by(|&a, &b| support[a].total_cmp(&support[b]));
    let mut cum = 0.0;
    let mut lo = None;
    let mut hi = None;
    for &i in &order {
        cum += weights[i];
        if lo.is_none() && cum >= 0.05 {
            lo = Some(support[i]);
        }
        if hi.is_none() && cum >= 0.95 {
            hi = Some(support[i]);
            break;
        }
    }
    let last = support[*order.last().expect("non-empty support")];
    (lo.unwrap_or(last), hi.unwrap_or(last))
}

/// Deterministic posterior by quadrature: collapsed log-likelihood on
/// `grid_size` midpoint cells spanning the prior support, normalized in
/// log-space.
pub fn posterior_oracle(
    dataset: &[SprinklerRecord],
    cfg: &GenerativeConfig,
    grid_size: usize,
) -> Result<PosteriorResult> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if grid_size < 100 {
        return Err(Error::InvalidParameter {
            name: "grid_size",
            value: grid_size as f64,
            reason: "need at least 100 gridpoints",
        });
    }
    let counts = count_on(dataset);
    let prior = cfg.lambda_prior;
    let width = prior.width();
    let mut support = Vec::with_capacity(grid_size);
    let mut log_weights = Vec::with_capacity(grid_size);
    for i in 0..grid_size {
        let lambda = prior.lo + (i as f64 + 0.5) * width / grid_size as f64;
        support.push(lambda);
        log_weights.push(counts_log_likelihood(lambda, counts, cfg)?);
    }
    PosteriorResult::from_log_weights(PosteriorKind::Grid, support, log_weights, prior)
}

/// Likelihood-weighting posterior: `n_particles` draws of the rate from its
/// prior, each weighted by the full-dataset likelihood with fresh
/// measurement times per record.
///
/// Determinism contract: particle `i` consumes an RNG stream derived only
/// from `(seed, i)`, so results are bitwise identical for any worker count,
/// and the work may be spread across threads freely.
pub fn posterior_importance(
    dataset: &[SprinklerRecord],
    cfg: &GenerativeConfig,
    n_particles: usize,
    seed: u64,
) -> Result<PosteriorResult> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_particles == 0 {
        return Err(Error::InvalidParameter {
            name: "n_particles",
            value: 0.0,
            reason: "need at least one particle",
        });
    }
    let prior = cfg.lambda_prior;
    let p = cfg.humidity_prior_p;
    let particles: Vec<(f64, f64)> = (0..n_particles)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let lambda = prior.lo + rng.gen::<f64>() * prior.width();
            let mut log_w = 0.0;
            for record in dataset {
                let t_noon = sample_window(&mut rng, cfg.morning_window);
                let t_night = sample_window(&mut rng, cfg.evening_window);
                let (on1, off1) = per_time_on_off(
                    lambda,
                    cfg.morning_humidity,
                    p,
                    cfg.noon_query_h - t_noon,
                );
                let (on2, off2) = per_time_on_off(
                    lambda,
                    cfg.evening_humidity,
                    p,
                    cfg.midnight_query_h - t_night,
                );
                log_w += if record.s_noon { on1 } else { off1 }.ln();
                log_w += if record.s_night { on2 } else { off2 }.ln();
            }
            (lambda, log_w)
        })
        .collect();
    let (support, log_weights): (Vec<f64>, Vec<f64>) = particles.into_iter().unzip();
    PosteriorResult::from_log_weights(
        PosteriorKind::WeightedSamples,
        support,
        log_weights,
        prior,
    )
}

fn sample_window(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

/// Inverse participation number of the normalized weights: how many
/// particles effectively carry the posterior.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let sq = kahan_sum(weights.iter().map(|w| w * w));
    if sq == 0.0 {
        0.0
    } else {
        1.0 / sq
    }
}

/// Half the L1 distance between two aligned bin-mass vectors.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "histograms must align");
    0.5 * kahan_sum(a.iter().zip(b).map(|(x, y)| (x - y).abs()))
}

/// Number of histogram bins used by [`summarize`] and the report tooling.
pub const HISTOGRAM_BINS: usize = 50;

/// One CSV-ready histogram bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

/// Summary statistics plus a CSV-ready histogram over the prior support.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub ci90: (f64, f64),
    pub histogram: Vec<HistogramBin>,
}

pub fn summarize(result: &PosteriorResult) -> Summary {
    let masses = result.histogram(HISTOGRAM_BINS);
    let prior = result.prior();
    let step = prior.width() / HISTOGRAM_BINS as f64;
    let histogram = masses
        .iter()
        .enumerate()
        .map(|(i, &mass)| HistogramBin {
            lo: prior.lo + i as f64 * step,
            hi: prior.lo + (i + 1) as f64 * step,
            mass,
        })
        .collect();
    Summary { mean: result.mean(), ci90: result.ci90(), histogram }
}

// ---------------------------------------------------------------------------
// File formats: JSON-lines datasets, posterior CSV, summary JSON.
// ---------------------------------------------------------------------------

/// Parses a JSON-lines dataset; blank lines are allowed, anything else must
/// be a `{"s_noon": bool, "s_night": bool}` object.
pub fn parse_dataset(text: &str) -> Result<Vec<SprinklerRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| Error::Parse(format!("line {}: {}", i + 1, e)))
        })
        .collect()
}

pub fn read_dataset(path: &std::path::Path) -> Result<Vec<SprinklerRecord>> {
    parse_dataset(&std::fs::read_to_string(path)?)
}

pub fn dataset_to_jsonl(records: &[SprinklerRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serialization cannot fail"));
        out.push('\n');
    }
    out
}

/// Renders `lambda,weight` rows; numbers use the shortest round-trip form.
pub fn posterior_to_csv(result: &PosteriorResult) -> String {
    let mut out = String::from("lambda,weight\n");
    for (l, w) in result.support().iter().zip(result.weights()) {
        out.push_str(&format!("{l},{w}\n"));
    }
    out
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    mean: f64,
    ci90_lo: f64,
    ci90_hi: f64,
    n_records: usize,
    backend: &'a str,
}

/// The single-object summary emitted next to a posterior.
pub fn summary_json(result: &PosteriorResult, n_records: usize, backend: &str) -> String {
    serde_json::to_string(&SummaryJson {
        mean: result.mean(),
        ci90_lo: result.ci90().0,
        ci90_hi: result.ci90().1,
        n_records,
        backend,
    })
    .expect("summary serialization cannot fail")
}
