//! Shared error type for the core library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter was outside its documented domain.
    #[error("invalid parameter {name}: {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A clock was asked to move backwards.
    #[error("clock regression: cannot move from {from_h} h back to {to_h} h")]
    ClockRegression { from_h: f64, to_h: f64 },

    /// An event was interrogated by a clock that reads earlier than the
    /// event's own arrival stamp.
    #[error("event arrived at local time {arrival_h} h but the clock reads {now_h} h")]
    ClockBehindEvent { arrival_h: f64, now_h: f64 },

    /// Weighted-average requested over an empty timeline.
    #[error("empty timeline: the time-weighted marginal is undefined")]
    EmptyTimeline,

    /// Graph construction or lookup failed.
    #[error("graph error: {0}")]
    Graph(String),

    /// A measurement time fell outside its configured window.
    #[error("time {t_h} h is outside the window [{lo_h}, {hi_h}] h")]
    OutOfWindow { t_h: f64, lo_h: f64, hi_h: f64 },

    /// A rate was outside the prior's support.
    #[error("lambda {lambda} is outside the prior support [{lo}, {hi}]")]
    OutsidePriorSupport { lambda: f64, lo: f64, hi: f64 },

    /// Inference was asked to run on an empty dataset.
    #[error("empty dataset: nothing to condition on")]
    EmptyDataset,

    /// Every candidate rate ended with zero likelihood; the weighted
    /// posterior carries no information.
    #[error(
        "degenerate weights: all {n_particles} candidate rates have zero \
         likelihood (effective sample size {ess})"
    )]
    DegenerateWeights { n_particles: usize, ess: f64 },

    /// Scenario or generator configuration failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Malformed serialized data.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
