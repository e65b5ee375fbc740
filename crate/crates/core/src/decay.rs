//! Exponential staleness decay for binary observations.
//!
//! A boolean reading that is `t` hours stale is softened toward the
//! variable's long-run marginal `p`:
//!
//! ```text
//! P(state = true | observed s, age t) = exp(-lambda * t) * s + (1 - exp(-lambda * t)) * p
//! ```
//!
//! At `t = 0` the observation is returned verbatim; as `t` grows the estimate
//! fades to `p` at rate `lambda` (per hour). The false-probability is the
//! exact complement.

use crate::error::{Error, Result};

/// Decay parameters: rate of staleness fade and the fade-out target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModel {
    lambda_per_h: f64,
    marginal_p: f64,
}

impl DecayModel {
    /// Builds a model; rejects a negative or non-finite rate and a marginal
    /// outside [0, 1].
    pub fn new(lambda_per_h: f64, marginal_p: f64) -> Result<Self> {
        if !lambda_per_h.is_finite() || lambda_per_h < 0.0 {
            return Err(Error::InvalidParameter {
                name: "lambda_per_h",
                value: lambda_per_h,
                reason: "must be finite and non-negative",
            });
        }
        if !marginal_p.is_finite() || !(0.0..=1.0).contains(&marginal_p) {
            return Err(Error::InvalidParameter {
                name: "marginal_p",
                value: marginal_p,
                reason: "must be a probability in [0, 1]",
            });
        }
        Ok(Self { lambda_per_h, marginal_p })
    }

    pub fn lambda_per_h(&self) -> f64 {
        self.lambda_per_h
    }

    pub fn marginal_p(&self) -> f64 {
        self.marginal_p
    }

    /// Probability that the underlying state is *true* given a stale reading.
    ///
    /// Exact at the corners: a fresh observation (`delay = 0`) is returned
    /// verbatim, and the value always lies between the observation and the
    /// marginal.
    pub fn true_probability(&self, obs: BinaryObservation) -> f64 {
        let e = (-self.lambda_per_h * obs.delay_h()).exp();
        let s: f64 = if obs.value() { 1.0 } else { 0.0 };
        // e*s + (1-e)*p, arranged so the e = 1 and e = 0 endpoints are exact.
        let raw = if obs.value() {
            e + (1.0 - e) * self.marginal_p
        } else {
            (1.0 - e) * self.marginal_p
        };
        raw.clamp(s.min(self.marginal_p), s.max(self.marginal_p))
    }

    /// Probability that the underlying state is *false*: the exact complement
    /// of [`true_probability`](Self::true_probability).
    pub fn false_probability(&self, obs: BinaryObservation) -> f64 {
        1.0 - self.true_probability(obs)
    }

    /// Samples the decay of one observation on an even grid of `steps + 1`
    /// ages over `[0, t_max_h]`, returning `(age, true_probability)` pairs.
    pub fn decay_curve(
        &self,
        value: bool,
        t_max_h: f64,
        steps: usize,
    ) -> Result<Vec<(f64, f64)>> {
        if !t_max_h.is_finite() || t_max_h < 0.0 {
            return Err(Error::InvalidParameter {
                name: "t_max_h",
                value: t_max_h,
                reason: "must be finite and non-negative",
            });
        }
        if steps == 0 {
            return Err(Error::InvalidParameter {
                name: "steps",
                value: 0.0,
                reason: "need at least one step",
            });
        }
        (0..=steps)
            .map(|i| {
                let t = (i as f64) * t_max_h / (steps as f64);
                let obs = BinaryObservation::new(value, t)?;
                Ok((t, self.true_probability(obs)))
            })
            .collect()
    }
}

/// A boolean reading together with its accumulated age in hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryObservation {
    value: bool,
    delay_h: f64,
}

impl BinaryObservation {
    /// Rejects a negative or non-finite age.
    pub fn new(value: bool, delay_h: f64) -> Result<Self> {
        if !delay_h.is_finite() || delay_h < 0.0 {
            return Err(Error::InvalidParameter {
                name: "delay_h",
                value: delay_h,
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self { value, delay_h })
    }

    pub fn value(&self) -> bool {
        self.value
    }

    pub fn delay_h(&self) -> f64 {
        self.delay_h
    }
}

/// One stretch of a recorded timeline during which the variable held `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelineSegment {
    value: bool,
    duration_h: f64,
}

impl TimelineSegment {
    /// Rejects non-positive or non-finite durations.
    pub fn new(value: bool, duration_h: f64) -> Result<Self> {
        if !duration_h.is_finite() || duration_h <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "duration_h",
                value: duration_h,
                reason: "must be finite and positive",
            });
        }
        Ok(Self { value, duration_h })
    }

    pub fn value(&self) -> bool {
        self.value
    }

    pub fn duration_h(&self) -> f64 {
        self.duration_h
    }
}

/// Time-weighted fraction of the timeline spent in the `true` state — the
/// empirical estimate of the fade-out marginal `p`.
///
/// The timeline must be exhaustive: gaps are the caller's problem, and an
/// empty timeline is an error rather than a silent 0/0.
pub fn empirical_marginal(timeline: &[TimelineSegment]) -> Result<f64> {
    if timeline.is_empty() {
        return Err(Error::EmptyTimeline);
    }
    let mut on = 0.0;
    let mut total = 0.0;
    for seg in timeline {
        total += seg.duration_h;
        if seg.value {
            on += seg.duration_h;
        }
    }
    Ok(on / total)
}
