//! Deterministic discrete-event simulation of the two-node scenario.
//!
//! A humidity sensor measures `true` once in a morning window and `false`
//! once in an evening window, every day. Measurements propagate reactively:
//! a change detector decides whether to send, transmission latency is
//! sampled, and the delivered event carries its accumulated delay stamp. The
//! actuator holds the latest delivered event, answers noon and midnight
//! queries through the delayed graph, and samples its on/off decision. There
//! are no heartbeats and no polling — every transmission is provoked by a
//! measurement, which the trace audit can verify after the fact.
//!
//! Everything runs on simulated time from seeded streams (measurement times,
//! latencies, decisions are independent), so identical configs produce
//! byte-identical traces.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::clock::{LocalClock, StampedEvent};
use crate::error::{Error, Result};
use crate::graph::{sprinkler_graph, DelayedGraph};
use crate::inference::{GenerativeConfig, SprinklerRecord, UniformPrior};

/// Transmission-latency distribution for notified measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatencyModel {
    /// Instant delivery; with it the simulator reproduces the regime where
    /// staleness comes only from measurement-to-query gaps.
    Zero,
    Fixed { hours: f64 },
    Gamma { shape: f64, scale_minutes: f64 },
}

/// How the sender estimates the transmission time it stamps onto a
/// forwarded event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateModel {
    /// Stamp the true sampled latency (perfect estimation).
    TrueLatency,
    /// Stamp a fixed constant regardless of the true latency, for studying
    /// estimation error.
    Fixed { hours: f64 },
}

/// Full scenario description; serializable as the JSON config the CLI loads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub days: u32,
    pub seed: u64,
    /// Change-detection threshold: notify iff the value moved by more
    /// than this since the last notification.
    pub epsilon: f64,
    pub lambda_delta: f64,
    pub marginal_p: f64,
    pub morning_window: (f64, f64),
    pub evening_window: (f64, f64),
    pub noon_query_h: f64,
    pub midnight_query_h: f64,
    pub latency: LatencyModel,
    pub estimate: EstimateModel,
    pub sensor_skew_h: f64,
    pub actuator_skew_h: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            days: 1000,
            seed: 7,
            epsilon: 0.0,
            lambda_delta: 0.25,
            marginal_p: 0.2,
            morning_window: (0.0, 3.0),
            evening_window: (12.0, 15.0),
            noon_query_h: 12.0,
            midnight_query_h: 24.0,
            latency: LatencyModel::Gamma { shape: 9.0, scale_minutes: 10.0 },
            estimate: EstimateModel::TrueLatency,
            sensor_skew_h: 0.0,
            actuator_skew_h: 0.0,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// The day layout must interleave cleanly:
    /// morning window ≤ noon query ≤ evening window ≤ midnight query ≤ 24 h.
    pub fn validate(&self) -> Result<()> {
        if self.days == 0 {
            return Err(Error::InvalidConfig("days must be at least 1".into()));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} must be finite and non-negative",
                self.epsilon
            )));
        }
        crate::decay::DecayModel::new(self.lambda_delta, self.marginal_p)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let proper = |name: &str, (lo, hi): (f64, f64)| -> Result<()> {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi || lo < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} window [{lo}, {hi}] is not a proper non-negative interval"
                )));
            }
            Ok(())
        };
        proper("morning", self.morning_window)?;
        proper("evening", self.evening_window)?;
        if !(self.morning_window.1 <= self.noon_query_h
            && self.noon_query_h <= self.evening_window.0
            && self.evening_window.1 <= self.midnight_query_h
            && self.midnight_query_h <= 24.0)
        {
            return Err(Error::InvalidConfig(format!(
                "day layout must satisfy morning [{},{}] <= noon {} <= evening [{},{}] <= midnight {} <= 24",
                self.morning_window.0,
                self.morning_window.1,
                self.noon_query_h,
                self.evening_window.0,
                self.evening_window.1,
                self.midnight_query_h
            )));
        }
        match self.latency {
            LatencyModel::Zero => {}
            LatencyModel::Fixed { hours } => {
                if !hours.is_finite() || hours < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "fixed latency {hours} must be finite and non-negative"
                    )));
                }
            }
            LatencyModel::Gamma { shape, scale_minutes } => {
                if !shape.is_finite() || shape <= 0.0 || !scale_minutes.is_finite()
                    || scale_minutes <= 0.0
                {
                    return Err(Error::InvalidConfig(format!(
                        "gamma latency (shape {shape}, scale {scale_minutes} min) must be positive"
                    )));
                }
            }
        }
        if let EstimateModel::Fixed { hours } = self.estimate {
            if !hours.is_finite() || hours < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "fixed estimate {hours} must be finite and non-negative"
                )));
            }
        }
        if !self.sensor_skew_h.is_finite() || !self.actuator_skew_h.is_finite() {
            return Err(Error::InvalidConfig("clock skews must be finite".into()));
        }
        Ok(())
    }

    /// The inference-side view of this scenario (flat rate prior over
    /// [0, 1]), for feeding simulated datasets straight into the posterior
    /// backends.
    pub fn generative_config(&self) -> GenerativeConfig {
        GenerativeConfig {
            humidity_prior_p: self.marginal_p,
            morning_window: self.morning_window,
            morning_humidity: true,
            noon_query_h: self.noon_query_h,
            evening_window: self.evening_window,
            evening_humidity: false,
            midnight_query_h: self.midnight_query_h,
            lambda_prior: UniformPrior { lo: 0.0, hi: 1.0 },
        }
    }
}

/// ε-threshold change detector with notify-time state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangePolicy {
    pub epsilon: f64,
}

/// Outcome of offering a value to the change detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    Notify,
    Suppress,
}

/// Tracks the last *notified* value; suppressed values leave no trace, so a
/// slow drift below the threshold stays suppressed forever.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChangeDetector {
    last_notified: Option<f64>,
}

impl ChangeDetector {
    pub fn new() -> Self {
        Self::default()
    }

    /// First value always notifies; afterwards, notify iff the value moved
    /// strictly more than ε from the last notified one.
    pub fn observe(&mut self, new_value_prob: f64, policy: ChangePolicy) -> Propagation {
        let notify = match self.last_notified {
            None => true,
            Some(last) => (new_value_prob - last).abs() > policy.epsilon,
        };
        if notify {
            self.last_notified = Some(new_value_prob);
            Propagation::Notify
        } else {
            Propagation::Suppress
        }
    }
}

/// What a node is, for trace consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Sensor,
    Actuator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimNode {
    pub id: String,
    pub role: NodeRole,
    pub skew_h: f64,
}

/// One actuator decision, as written into the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRecord {
    pub t_h: f64,
    pub node: String,
    pub decision: bool,
}

/// Everything observable that happened, in processing order.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEntry {
    /// A sensor stamped a fresh local measurement.
    Measurement(StampedEvent),
    /// A forwarded event arrived at the actuator.
    Delivery(StampedEvent),
    /// The actuator answered a query.
    Query(QueryRecord),
}

/// Counters kept by the event loop; `delay_evaluations` counts every time an
/// event's current delay was actually computed, which is how the "no ticking
/// between receipt and query" property is checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SimStats {
    pub measurements: u64,
    pub notifications: u64,
    pub suppressions: u64,
    pub deliveries: u64,
    pub queries: u64,
    pub unobserved_queries: u64,
    pub delay_evaluations: u64,
}

/// Output of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub trace: Vec<TraceEntry>,
    pub records: Vec<SprinklerRecord>,
    pub stats: SimStats,
    pub nodes: Vec<SimNode>,
}

const SENSOR_ID: &str = "humidity-sensor";
const ACTUATOR_ID: &str = "sprinkler-actuator";
const VARIABLE: &str = "humidity";
const TARGET: &str = "sprinkler";

#[derive(Debug, Clone)]
enum EventKind {
    Measure { value: bool },
    Deliver { event: StampedEvent, sender_clock: LocalClock, estimate_h: f64 },
    Query { day: usize, noon: bool },
}

#[derive(Debug, Clone)]
struct QueueItem {
    t_h: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for QueueItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for QueueItem {}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueItem {
    /// Time order; insertion order breaks ties, so simultaneous events are
    /// FIFO.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.t_h.total_cmp(&other.t_h).then(self.seq.cmp(&other.seq))
    }
}

struct EventQueue {
    heap: BinaryHeap<Reverse<QueueItem>>,
    next_seq: u64,
}

impl EventQueue {
    fn new() -> Self {
        Self { heap: BinaryHeap::new(), next_seq: 0 }
    }

    fn push(&mut self, t_h: f64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(QueueItem { t_h, seq, kind }));
    }

    fn pop(&mut self) -> Option<QueueItem> {
        self.heap.pop().map(|Reverse(item)| item)
    }
}

/// Runs the scenario to completion and returns the trace, the per-day
/// decision records, and the loop counters.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    cfg.validate()?;
    let graph: DelayedGraph = sprinkler_graph(cfg.lambda_delta, cfg.marginal_p)?;

    let mut times_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    times_rng.set_stream(0);
    let mut latency_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    latency_rng.set_stream(1);
    let mut decision_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    decision_rng.set_stream(2);

    let mut queue = EventQueue::new();
    let days = cfg.days as usize;
    for day in 0..days {
        let base = 24.0 * day as f64;
        let morning =
            base + sample_uniform(&mut times_rng, cfg.morning_window);
        let evening =
            base + sample_uniform(&mut times_rng, cfg.evening_window);
        queue.push(morning, EventKind::Measure { value: true });
        queue.push(evening, EventKind::Measure { value: false });
        queue.push(base + cfg.noon_query_h, EventKind::Query { day, noon: true });
        queue.push(base + cfg.midnight_query_h, EventKind::Query { day, noon: false });
    }

    let mut sensor_clock = LocalClock::with_skew(cfg.sensor_skew_h)?;
    let mut actuator_clock = LocalClock::with_skew(cfg.actuator_skew_h)?;
    let mut detector = ChangeDetector::new();
    let policy = ChangePolicy { epsilon: cfg.epsilon };
    let mut latest: BTreeMap<String, StampedEvent> = BTreeMap::new();
    let mut trace = Vec::with_capacity(days * 4);
    let mut stats = SimStats::default();
    let mut noon_decisions: Vec<Option<bool>> = vec![None; days];
    let mut night_decisions: Vec<Option<bool>> = vec![None; days];

    while let Some(item) = queue.pop() {
        match item.kind {
            EventKind::Measure { value } => {
                sensor_clock.advance_to(item.t_h)?;
                let event =
                    StampedEvent::stamp_local(SENSOR_ID, VARIABLE, value, &sensor_clock);
                trace.push(TraceEntry::Measurement(event.clone()));
                stats.measurements += 1;
                let as_prob = if value { 1.0 } else { 0.0 };
                match detector.observe(as_prob, policy) {
                    Propagation::Notify => {
                        stats.notifications += 1;
                        let latency_h = sample_latency(&mut latency_rng, cfg.latency);
                        let estimate_h = match cfg.estimate {
                            EstimateModel::TrueLatency => latency_h,
                            EstimateModel::Fixed { hours } => hours,
                        };
                        // Snapshot the sender clock at send time; the forward
                        // happens when the event lands.
                        queue.push(
                            item.t_h + latency_h,
                            EventKind::Deliver {
                                event,
                                sender_clock: sensor_clock,
                                estimate_h,
                            },
                        );
                    }
                    Propagation::Suppress => stats.suppressions += 1,
                }
            }
            EventKind::Deliver { event, sender_clock, estimate_h } => {
                actuator_clock.advance_to(item.t_h)?;
                let forwarded = event.forward(&sender_clock, estimate_h, &actuator_clock)?;
                stats.delay_evaluations += 1; // forward read the sender-side delay
                stats.deliveries += 1;
                latest.insert(forwarded.variable.clone(), forwarded.clone());
                trace.push(TraceEntry::Delivery(forwarded));
            }
            EventKind::Query { day, noon } => {
                actuator_clock.advance_to(item.t_h)?;
                let p_on = match latest.get(VARIABLE) {
                    Some(evidence) => {
                        stats.delay_evaluations += 1;
                        graph.query_delayed(TARGET, evidence, &actuator_clock)?
                    }
                    None => {
                        stats.unobserved_queries += 1;
                        graph.query_unobserved(TARGET)?
                    }
                };
                let decision = decision_rng.gen::<f64>() < p_on;
                stats.queries += 1;
                trace.push(TraceEntry::Query(QueryRecord {
                    t_h: actuator_clock.now_h(),
                    node: ACTUATOR_ID.to_string(),
                    decision,
                }));
                if noon {
                    noon_decisions[day] = Some(decision);
                } else {
                    night_decisions[day] = Some(decision);
                }
            }
        }
    }

    let records = noon_decisions
        .into_iter()
        .zip(night_decisions)
        .map(|(s_noon, s_night)| SprinklerRecord {
            s_noon: s_noon.expect("every day gets a noon query"),
            s_night: s_night.expect("every day gets a midnight query"),
        })
        .collect();

    Ok(ScenarioRun {
        trace,
        records,
        stats,
        nodes: vec![
            SimNode { id: SENSOR_ID.into(), role: NodeRole::Sensor, skew_h: cfg.sensor_skew_h },
            SimNode {
                id: ACTUATOR_ID.into(),
                role: NodeRole::Actuator,
                skew_h: cfg.actuator_skew_h,
            },
        ],
    })
}

fn sample_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

fn sample_latency(rng: &mut ChaCha8Rng, model: LatencyModel) -> f64 {
    match model {
        LatencyModel::Zero => 0.0,
        LatencyModel::Fixed { hours } => hours,
        LatencyModel::Gamma { shape, scale_minutes } => {
            Gamma::new(shape, scale_minutes / 60.0)
                .expect("gamma parameters validated with the config")
                .sample(rng)
        }
    }
}

/// Serializes a trace as JSON lines: events in the clock wire format,
/// queries as `{"t_h": …, "node": …, "decision": …}`.
pub fn trace_to_jsonl(trace: &[TraceEntry]) -> String {
    let mut out = String::new();
    for entry in trace {
        match entry {
            TraceEntry::Measurement(e) | TraceEntry::Delivery(e) => {
                out.push_str(&e.encode_line());
            }
            TraceEntry::Query(q) => {
                out.push_str(
                    &serde_json::to_string(q).expect("query serialization cannot fail"),
                );
            }
        }
        out.push('\n');
    }
    out
}

/// Checks that the network is purely reactive: every delivery must consume an
/// earlier, not-yet-consumed measurement of the same (source, variable,
/// value). A delivery with no such provocation is a self-scheduled send —
/// a heartbeat — and fails the audit. The empty trace passes vacuously.
pub fn no_heartbeat_audit(trace: &[TraceEntry]) -> bool {
    let mut pending: BTreeMap<(&str, &str, bool), u64> = BTreeMap::new();
    for entry in trace {
        match entry {
            TraceEntry::Measurement(e) => {
                *pending
                    .entry((e.source_id.as_str(), e.variable.as_str(), e.value))
                    .or_insert(0) += 1;
            }
            TraceEntry::Delivery(e) => {
                match pending.get_mut(&(e.source_id.as_str(), e.variable.as_str(), e.value)) {
                    Some(n) if *n > 0 => *n -= 1,
                    _ => return false,
                }
            }
            TraceEntry::Query(_) => {}
        }
    }
    true
}
