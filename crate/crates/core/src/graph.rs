//! A two-layer graphical model whose edges carry transmission delay.
//!
//! Declared variables have Bernoulli priors. A delay edge softens the
//! parent's observed value by its accumulated staleness (see [`crate::decay`])
//! and feeds the result through an affine conditional
//! `P(target = on | h) = a + b * h`, so conditioning on a delayed observation
//! factors into "classical conditional × staleness decay". Targets are
//! derived nodes: they carry a conditional instead of a prior.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::clock::{LocalClock, StampedEvent};
use crate::decay::{BinaryObservation, DecayModel};
use crate::error::{Error, Result};

/// A root variable with a Bernoulli prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub bernoulli_p: f64,
}

/// A delayed dependency: `from` is measured remotely, `to` is evaluated
/// locally from the stale measurement.
///
/// The transmission delay has a Gamma prior (shape/scale, scale in minutes as
/// is natural for network latencies; everything else runs in hours). The
/// affine conditional must map [0, 1] into [0, 1]: `a` in [0, 1] and
/// `a + b` in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayEdge {
    pub from: String,
    pub to: String,
    pub gamma_shape: f64,
    pub gamma_scale_minutes: f64,
    pub lambda_delta: f64,
    pub marginal_p: f64,
    pub conditional_a: f64,
    pub conditional_b: f64,
}

impl DelayEdge {
    fn decay_model(&self) -> Result<DecayModel> {
        DecayModel::new(self.lambda_delta, self.marginal_p)
    }

    fn conditional(&self, h: f64) -> f64 {
        (self.conditional_a + self.conditional_b * h).clamp(0.0, 1.0)
    }
}

/// One joint draw from the priors: variable values plus edge delays in hours.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSample {
    pub values: Vec<(String, bool)>,
    pub delays_h: Vec<(String, String, f64)>,
}

/// A validated delayed graphical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayedGraph {
    variables: Vec<VariableSpec>,
    edges: Vec<DelayEdge>,
}

impl DelayedGraph {
    pub fn new(variables: Vec<VariableSpec>, edges: Vec<DelayEdge>) -> Result<Self> {
        let graph = Self { variables, edges };
        graph.validate()?;
        Ok(graph)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn edges(&self) -> &[DelayEdge] {
        &self.edges
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let graph: DelayedGraph =
            serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
        graph.validate()?;
        Ok(graph)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization cannot fail")
    }

    fn validate(&self) -> Result<()> {
        let mut names = std::collections::BTreeSet::new();
        for v in &self.variables {
            if v.name.is_empty() {
                return Err(Error::Graph("variable with empty name".into()));
            }
            if !names.insert(v.name.as_str()) {
                return Err(Error::Graph(format!("duplicate variable {:?}", v.name)));
            }
            if !v.bernoulli_p.is_finite() || !(0.0..=1.0).contains(&v.bernoulli_p) {
                return Err(Error::Graph(format!(
                    "variable {:?}: bernoulli_p {} is not a probability",
                    v.name, v.bernoulli_p
                )));
            }
        }
        let mut targets = std::collections::BTreeSet::new();
        for e in &self.edges {
            if !names.contains(e.from.as_str()) {
                return Err(Error::Graph(format!(
                    "edge {:?} -> {:?}: source is not a declared variable",
                    e.from, e.to
                )));
            }
            if e.to.is_empty() || e.to == e.from {
                return Err(Error::Graph(format!(
                    "edge {:?} -> {:?}: bad target",
                    e.from, e.to
                )));
            }
            if names.contains(e.to.as_str()) {
                return Err(Error::Graph(format!(
                    "node {:?} has both a prior and an incoming edge",
                    e.to
                )));
            }
            if !targets.insert(e.to.as_str()) {
                return Err(Error::Graph(format!(
                    "target {:?} has more than one delayed parent",
                    e.to
                )));
            }
            if !e.gamma_shape.is_finite() || e.gamma_shape <= 0.0 {
                return Err(Error::Graph(format!(
                    "edge to {:?}: gamma_shape {} must be positive",
                    e.to, e.gamma_shape
                )));
            }
            if !e.gamma_scale_minutes.is_finite() || e.gamma_scale_minutes <= 0.0 {
                return Err(Error::Graph(format!(
                    "edge to {:?}: gamma_scale_minutes {} must be positive",
                    e.to, e.gamma_scale_minutes
                )));
            }
            e.decay_model()?;
            let a = e.conditional_a;
            let ab = e.conditional_a + e.conditional_b;
            if !a.is_finite() || !(0.0..=1.0).contains(&a) || !ab.is_finite()
                || !(0.0..=1.0).contains(&ab)
            {
                return Err(Error::Graph(format!(
                    "edge to {:?}: conditional a={} b={} does not map [0,1] into [0,1]",
                    e.to, e.conditional_a, e.conditional_b
                )));
            }
        }
        // Sources must be declared and targets must not be, so a cycle would
        // already have tripped the checks above; keep an explicit walk anyway
        // so the rule survives future loosening.
        self.check_acyclic()
    }

    fn check_acyclic(&self) -> Result<()> {
        use std::collections::{BTreeMap, BTreeSet};
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.edges {
            out.entry(e.from.as_str()).or_default().push(e.to.as_str());
        }
        let mut done: BTreeSet<&str> = BTreeSet::new();
        for start in out.keys().copied().collect::<Vec<_>>() {
            if done.contains(start) {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            let mut path: BTreeSet<&str> = BTreeSet::new();
            path.insert(start);
            while let Some((node, idx)) = stack.pop() {
                let next = out.get(node).and_then(|v| v.get(idx)).copied();
                match next {
                    Some(child) => {
                        stack.push((node, idx + 1));
                        if path.contains(child) {
                            return Err(Error::Graph(format!("cycle through {child:?}")));
                        }
                        if !done.contains(child) {
                            path.insert(child);
                            stack.push((child, 0));
                        }
                    }
                    None => {
                        path.remove(node);
                        done.insert(node);
                    }
                }
            }
        }
        Ok(())
    }

    fn edge_into(&self, target: &str) -> Result<&DelayEdge> {
        self.edges
            .iter()
            .find(|e| e.to == target)
            .ok_or_else(|| Error::Graph(format!("no edge into {target:?}")))
    }

    /// Conditional on-probability of `target` given a stale observation of
    /// its parent: the parent value is softened by its current delay, then
    /// pushed through the target's affine conditional.
    pub fn query_delayed(
        &self,
        target: &str,
        evidence: &StampedEvent,
        clock: &LocalClock,
    ) -> Result<f64> {
        let edge = self.edge_into(target)?;
        if evidence.variable != edge.from {
            return Err(Error::Graph(format!(
                "evidence is for {:?} but {:?} depends on {:?}",
                evidence.variable, target, edge.from
            )));
        }
        let delay = evidence.current_delay(clock)?;
        let h = edge
            .decay_model()?
            .true_probability(BinaryObservation::new(evidence.value, delay)?);
        Ok(edge.conditional(h))
    }

    /// Conditional on-probability of `target` when no observation of its
    /// parent has arrived at all: the infinitely-stale limit, i.e. the
    /// conditional evaluated at the parent's marginal.
    pub fn query_unobserved(&self, target: &str) -> Result<f64> {
        let edge = self.edge_into(target)?;
        Ok(edge.conditional(edge.marginal_p))
    }

    /// One joint draw from all priors, deterministic per seed: variables in
    /// declaration order, then edge delays in declaration order.
    pub fn prior_sample(&self, seed: u64) -> PriorSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = self
            .variables
            .iter()
            .map(|v| (v.name.clone(), rng.gen::<f64>() < v.bernoulli_p))
            .collect();
        let delays_h = self
            .edges
            .iter()
            .map(|e| {
                let gamma = Gamma::new(e.gamma_shape, e.gamma_scale_minutes / 60.0)
                    .expect("edge gamma parameters validated at construction");
                (e.from.clone(), e.to.clone(), gamma.sample(&mut rng))
            })
            .collect();
        PriorSample { values, delays_h }
    }
}

/// The canonical two-node model: `humidity ~ Ber(p)` measured remotely,
/// `sprinkler` on with the inverse probability of the softened humidity,
/// delays Gamma(9, 10 min).
pub fn sprinkler_graph(lambda_per_h: f64, humidity_p: f64) -> Result<DelayedGraph> {
    DelayedGraph::new(
        vec![VariableSpec { name: "humidity".into(), bernoulli_p: humidity_p }],
        vec![DelayEdge {
            from: "humidity".into(),
            to: "sprinkler".into(),
            gamma_shape: 9.0,
            gamma_scale_minutes: 10.0,
            lambda_delta: lambda_per_h,
            marginal_p: humidity_p,
            conditional_a: 1.0,
            conditional_b: -1.0,
        }],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clock_at(t_h: f64) -> LocalClock {
        let mut c = LocalClock::new();
        c.advance_to(t_h).unwrap();
        c
    }

    #[test]
    fn fresh_evidence_reduces_to_the_classical_conditional() {
        let g = sprinkler_graph(0.25, 0.2).unwrap();
        let clock = clock_at(3.0);
        let humid = StampedEvent::stamp_local("s", "humidity", true, &clock);
        let dry = StampedEvent::stamp_local("s", "humidity", false, &clock);
        assert_eq!(g.query_delayed("sprinkler", &humid, &clock).unwrap(), 0.0);
        assert_eq!(g.query_delayed("sprinkler", &dry, &clock).unwrap(), 1.0);
    }

    #[test]
    fn ten_hour_stale_humid_reading_matches_reference() {
        let g = sprinkler_graph(0.25, 0.2).unwrap();
        let mut clock = clock_at(2.0);
        let humid = StampedEvent::stamp_local("s", "humidity", true, &clock);
        clock.advance_to(12.0).unwrap();
        let p_on = g.query_delayed("sprinkler", &humid, &clock).unwrap();
        assert!((p_on - (1.0 - 0.265_667_998_899_119)).abs() < 1e-12, "got {p_on}");
    }

    #[test]
    fn very_stale_evidence_fades_to_the_unobserved_answer() {
        let g = sprinkler_graph(0.25, 0.2).unwrap();
        let clock0 = clock_at(0.0);
        let humid = StampedEvent::stamp_local("s", "humidity", true, &clock0);
        for delay in [10.0, 40.0, 200.0] {
            let p_on = g
                .query_delayed("sprinkler", &humid, &clock_at(delay))
                .unwrap();
            let fade_bound = (-0.25 * delay).exp();
            let unobserved = g.query_unobserved("sprinkler").unwrap();
            assert!(
                (p_on - unobserved).abs() <= fade_bound + 1e-15,
                "delay {delay}: |{p_on} - {unobserved}| > {fade_bound}"
            );
        }
        assert_eq!(g.query_unobserved("sprinkler").unwrap(), 0.8);
    }

    #[test]
    fn evidence_for_the_wrong_variable_is_rejected() {
        let g = sprinkler_graph(0.25, 0.2).unwrap();
        let clock = clock_at(0.0);
        let e = StampedEvent::stamp_local("s", "pressure", true, &clock);
        assert!(g.query_delayed("sprinkler", &e, &clock).is_err());
        let humid = StampedEvent::stamp_local("s", "humidity", true, &clock);
        assert!(g.query_delayed("heater", &humid, &clock).is_err());
    }

    #[test]
    fn validation_rejects_malformed_graphs() {
        let humidity = VariableSpec { name: "humidity".into(), bernoulli_p: 0.2 };
        let edge = |from: &str, to: &str| DelayEdge {
            from: from.into(),
            to: to.into(),
            gamma_shape: 9.0,
            gamma_scale_minutes: 10.0,
            lambda_delta: 0.25,
            marginal_p: 0.2,
            conditional_a: 1.0,
            conditional_b: -1.0,
        };
        // dangling source
        assert!(DelayedGraph::new(vec![humidity.clone()], vec![edge("wind", "sprinkler")]).is_err());
        // self loop
        assert!(DelayedGraph::new(vec![humidity.clone()], vec![edge("humidity", "humidity")]).is_err());
        // two parents for one target
        let two = VariableSpec { name: "wind".into(), bernoulli_p: 0.5 };
        assert!(DelayedGraph::new(
            vec![humidity.clone(), two.clone()],
            vec![edge("humidity", "sprinkler"), edge("wind", "sprinkler")],
        )
        .is_err());
        // prior and conditional on the same node
        assert!(DelayedGraph::new(
            vec![humidity.clone(), two],
            vec![edge("humidity", "wind")],
        )
        .is_err());
        // conditional escaping [0, 1]
        let mut bad = edge("humidity", "sprinkler");
        bad.conditional_b = 0.5;
        bad.conditional_a = 0.8;
        assert!(DelayedGraph::new(vec![humidity], vec![bad]).is_err());
    }

    #[test]
    fn json_round_trip_preserves_the_graph() {
        let g = sprinkler_graph(0.25, 0.2).unwrap();
        let back = DelayedGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn prior_sampling_is_deterministic_per_seed() {
        let g = sprinkler_graph(0.25, 0.2).unwrap();
        assert_eq!(g.prior_sample(7), g.prior_sample(7));
        assert_ne!(g.prior_sample(7), g.prior_sample(8));
    }

    #[test]
    fn sampled_delays_match_the_gamma_prior_mean() {
        // Gamma(9, 10 min) has mean 90 min; check the empirical mean over
        // 100k draws to within 2 minutes.
        let g = sprinkler_graph(0.25, 0.2).unwrap();
        let n = 100_000;
        let sum_min: f64 = (0..n)
            .map(|i| g.prior_sample(i).delays_h[0].2 * 60.0)
            .sum();
        let mean_min = sum_min / n as f64;
        assert!((mean_min - 90.0).abs() < 2.0, "mean {mean_min} min");
    }

    #[test]
    fn sampled_values_match_the_bernoulli_prior() {
        let g = sprinkler_graph(0.25, 0.2).unwrap();
        let n = 100_000;
        let hits = (0..n).filter(|&i| g.prior_sample(i).values[0].1).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.2).abs() < 0.01, "freq {freq}");
    }
}
