//! Delay clocks: per-node local time plus lazily-aged event stamps.
//!
//! An event records the delay it had accumulated when it arrived and the
//! receiver's local time of receipt. Its *current* delay is never ticked —
//! it is reconstructed on demand as
//!
//! ```text
//! current_delay = delay_at_arrival + (clock.now - arrival_local_time)
//! ```
//!
//! so holding an event costs nothing. Forwarding adds a transmission estimate
//! to the sender-side delay and restamps with the receiver's clock, which
//! makes accumulated delay additive across hops.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node-local time source, injected so simulations stay deterministic.
///
/// Readings are monotone: the underlying time can only move forward. An
/// optional constant skew models a clock that runs offset from the global
/// simulation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalClock {
    base_h: f64,
    skew_h: f64,
}

impl LocalClock {
    /// A clock reading zero, with no skew.
    pub fn new() -> Self {
        Self { base_h: 0.0, skew_h: 0.0 }
    }

    /// A zeroed clock whose readings are offset by a constant `skew_h`.
    pub fn with_skew(skew_h: f64) -> Result<Self> {
        if !skew_h.is_finite() {
            return Err(Error::InvalidParameter {
                name: "skew_h",
                value: skew_h,
                reason: "must be finite",
            });
        }
        Ok(Self { base_h: 0.0, skew_h })
    }

    /// Moves the underlying time source to `t_h`; rejects regressions.
    pub fn advance_to(&mut self, t_h: f64) -> Result<()> {
        if !t_h.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t_h",
                value: t_h,
                reason: "must be finite",
            });
        }
        if t_h < self.base_h {
            return Err(Error::ClockRegression { from_h: self.base_h, to_h: t_h });
        }
        self.base_h = t_h;
        Ok(())
    }

    /// Current local reading (underlying time plus skew), in hours.
    pub fn now_h(&self) -> f64 {
        self.base_h + self.skew_h
    }
}

impl Default for LocalClock {
    fn default() -> Self {
        Self::new()
    }
}

/// A boolean measurement stamped with its accumulated delay.
///
/// This is also the wire type: one JSON object per line, field order as
/// declared, numbers at full round-trip precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StampedEvent {
    pub source_id: String,
    pub variable: String,
    pub value: bool,
    pub delay_at_arrival_h: f64,
    pub arrival_local_time_h: f64,
}

impl StampedEvent {
    /// Stamps a fresh local measurement: zero accumulated delay, received at
    /// the local clock's current reading.
    pub fn stamp_local(
        source_id: impl Into<String>,
        variable: impl Into<String>,
        value: bool,
        clock: &LocalClock,
    ) -> Self {
        Self {
            source_id: source_id.into(),
            variable: variable.into(),
            value,
            delay_at_arrival_h: 0.0,
            arrival_local_time_h: clock.now_h(),
        }
    }

    /// Accumulated delay as seen right now: the arrival-time delay plus the
    /// local holding time. Pure arithmetic — no stored state changes.
    ///
    /// Errors if the clock reads earlier than the event's receipt, which
    /// would mean a negative holding time.
    pub fn current_delay(&self, clock: &LocalClock) -> Result<f64> {
        let now = clock.now_h();
        if now < self.arrival_local_time_h {
            return Err(Error::ClockBehindEvent {
                arrival_h: self.arrival_local_time_h,
                now_h: now,
            });
        }
        Ok(self.delay_at_arrival_h + (now - self.arrival_local_time_h))
    }

    /// Hands the event to another node: the receiver's copy starts with the
    /// sender-side current delay plus the transmission estimate, stamped at
    /// the receiver's local time.
    pub fn forward(
        &self,
        sender_clock: &LocalClock,
        transmission_estimate_h: f64,
        receiver_clock: &LocalClock,
    ) -> Result<StampedEvent> {
        if !transmission_estimate_h.is_finite() || transmission_estimate_h < 0.0 {
            return Err(Error::InvalidParameter {
                name: "transmission_estimate_h",
                value: transmission_estimate_h,
                reason: "must be finite and non-negative",
            });
        }
        Ok(StampedEvent {
            source_id: self.source_id.clone(),
            variable: self.variable.clone(),
            value: self.value,
            delay_at_arrival_h: self.current_delay(sender_clock)? + transmission_estimate_h,
            arrival_local_time_h: receiver_clock.now_h(),
        })
    }

    /// One wire line: `{"source_id":…,"variable":…,"value":…,…}`.
    pub fn encode_line(&self) -> String {
        serde_json::to_string(self).expect("event serialization cannot fail")
    }

    /// Parses one wire line, rejecting malformed JSON, unknown keys, and
    /// out-of-domain numbers.
    pub fn decode_line(line: &str) -> Result<StampedEvent> {
        let event: StampedEvent =
            serde_json::from_str(line).map_err(|e| Error::Parse(e.to_string()))?;
        if !event.delay_at_arrival_h.is_finite() || event.delay_at_arrival_h < 0.0 {
            return Err(Error::Parse(format!(
                "delay_at_arrival_h must be finite and non-negative, got {}",
                event.delay_at_arrival_h
            )));
        }
        if !event.arrival_local_time_h.is_finite() {
            return Err(Error::Parse(format!(
                "arrival_local_time_h must be finite, got {}",
                event.arrival_local_time_h
            )));
        }
        Ok(event)
    }
}
