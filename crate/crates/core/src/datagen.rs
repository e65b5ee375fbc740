//! Synthetic benchmark datasets: independent Bernoulli draws per decision.
//!
//! Three canonical regimes ship with fixed seeds so every regression number
//! in the test suite refers to the same bytes:
//!
//! * case 1 — never on at noon, always on at night (no staleness at all)
//! * case 2 — on 20% of noons, 90% of nights (mild staleness)
//! * case 3 — on 80% of both (observations carry almost no signal)

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::inference::SprinklerRecord;

/// Parameters for one synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseSpec {
    pub p_noon: f64,
    pub p_night: f64,
    pub n_records: usize,
    pub seed: u64,
}

impl CaseSpec {
    pub fn new(p_noon: f64, p_night: f64, n_records: usize, seed: u64) -> Result<Self> {
        for (name, p) in [("p_noon", p_noon), ("p_night", p_night)] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter {
                    name,
                    value: p,
                    reason: "must be a probability in [0, 1]",
                });
            }
        }
        if n_records == 0 {
            return Err(Error::InvalidParameter {
                name: "n_records",
                value: 0.0,
                reason: "need at least one record",
            });
        }
        Ok(Self { p_noon, p_night, n_records, seed })
    }

    pub fn case1() -> Self {
        Self { p_noon: 0.0, p_night: 1.0, n_records: 1000, seed: 101 }
    }

    pub fn case2() -> Self {
        Self { p_noon: 0.2, p_night: 0.9, n_records: 1000, seed: 202 }
    }

    pub fn case3() -> Self {
        Self { p_noon: 0.8, p_night: 0.8, n_records: 1000, seed: 303 }
    }

    /// Draws the dataset; deterministic per seed. Degenerate probabilities
    /// are exact: 0 never fires, 1 always fires.
    pub fn generate(&self) -> Vec<SprinklerRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.n_records)
            .map(|_| SprinklerRecord {
                s_noon: rng.gen::<f64>() < self.p_noon,
                s_night: rng.gen::<f64>() < self.p_night,
            })
            .collect()
    }
}

/// The three shipped regimes, in order.
pub fn canonical_cases() -> [CaseSpec; 3] {
    [CaseSpec::case1(), CaseSpec::case2(), CaseSpec::case3()]
}
