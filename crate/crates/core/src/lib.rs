//! Staleness-aware probabilistic inference for eventually-consistent sensor
//! networks.
//!
//! The crate is built around one idea: a delayed binary observation should
//! not be trusted outright, it should be decayed toward the variable's
//! long-run marginal at a per-edge rate. Everything else follows from that —
//! delta-stamped events whose staleness is evaluated lazily ([`clock`]),
//! single-edge delayed queries over a small graphical model ([`graph`]),
//! posterior inference over an unknown decay rate from nothing but observed
//! actuator behavior ([`inference`]), canonical dataset generators
//! ([`datagen`]), and a deterministic discrete-event simulator of the
//! two-node sensor/actuator loop ([`simnet`]).
//!
//! The posterior over the decay rate is computed by two independent
//! backends — a dense grid and a likelihood-weighting particle sampler —
//! which serve as cross-checks on each other.

pub mod clock;
pub mod datagen;
pub mod decay;
pub mod error;
pub mod graph;
pub mod inference;
pub mod simnet;

pub use clock::{LocalClock, StampedEvent};
pub use datagen::CaseSpec;
pub use decay::{BinaryObservation, DecayModel, TimelineSegment};
pub use error::{Error, Result};
pub use graph::{sprinkler_graph, DelayEdge, DelayedGraph, PriorSample, VariableSpec};
pub use inference::{
    effective_sample_size, posterior_importance, posterior_oracle, summarize, total_variation,
    GenerativeConfig, OnCounts, PosteriorKind, PosteriorResult, SprinklerRecord, Summary,
    UniformPrior,
};
pub use simnet::{
    no_heartbeat_audit, run_scenario, trace_to_jsonl, ChangeDetector, ChangePolicy,
    EstimateModel, LatencyModel, NodeRole, Propagation, QueryRecord, ScenarioConfig, ScenarioRun,
    SimNode, SimStats, TraceEntry,
};
