//! Action selection: greedy with probability `1 - epsilon`, otherwise a draw
//! from a pluggable exploration strategy looked up by name.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::PolicyError;

/// Epsilon with multiplicative decay and floor, plus the Boltzmann temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplorationState {
    pub epsilon: f64,
    pub epsilon_min: f64,
    pub decay: f64,
    pub temperature: f64,
}

impl ExplorationState {
    pub fn decay_epsilon(&mut self) {
        self.epsilon = (self.epsilon * self.decay).max(self.epsilon_min);
    }
}

fn check_inputs(q_values: &[f64], temperature: f64) -> Result<(), PolicyError> {
    if q_values.is_empty() {
        return Err(PolicyError::EmptyActionSet);
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(PolicyError::InvalidTemperature(temperature));
    }
    if q_values.iter().any(|q| !q.is_finite()) {
        return Err(PolicyError::NonFinite);
    }
    Ok(())
}

/// Softmax of `q / temperature`, shifted by the maximum so it cannot overflow.
pub fn boltzmann_probs(q_values: &[f64], temperature: f64) -> Result<Vec<f64>, PolicyError> {
    check_inputs(q_values, temperature)?;
    let max = q_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = q_values.iter().map(|q| ((q - max) / temperature).exp()).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    Ok(p)
}

/// Mass proportional to `exp(q / temperature) * q`, negative masses clamped
/// to zero and the rest renormalized. Falls back to [`boltzmann_probs`] when
/// no action has positive mass.
pub fn boltzmann_probs_literal(q_values: &[f64], temperature: f64) -> Result<Vec<f64>, PolicyError> {
    check_inputs(q_values, temperature)?;
    let max = q_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = q_values
        .iter()
        .map(|&q| (((q - max) / temperature).exp() * q).max(0.0))
        .collect();
    let z: f64 = p.iter().sum();
    if z <= 0.0 {
        return boltzmann_probs(q_values, temperature);
    }
    p.iter_mut().for_each(|v| *v /= z);
    Ok(p)
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_index(probs: &[f64], rng: &mut dyn RngCore) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Distribution the agent samples from on exploration steps.
pub trait ExplorationStrategy: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn probabilities(&self, q_values: &[f64], temperature: f64) -> Result<Vec<f64>, PolicyError>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Boltzmann;

impl ExplorationStrategy for Boltzmann {
    fn name(&self) -> &'static str {
        "boltzmann"
    }

    fn probabilities(&self, q_values: &[f64], temperature: f64) -> Result<Vec<f64>, PolicyError> {
        boltzmann_probs(q_values, temperature)
    }
}

/// Boltzmann with the extra Q factor on the numerator.
#[derive(Debug, Default, Clone, Copy)]
pub struct LiteralBoltzmann;

impl ExplorationStrategy for LiteralBoltzmann {
    fn name(&self) -> &'static str {
        "boltzmann-literal"
    }

    fn probabilities(&self, q_values: &[f64], temperature: f64) -> Result<Vec<f64>, PolicyError> {
        boltzmann_probs_literal(q_values, temperature)
    }
}

/// Plain epsilon-greedy: explore uniformly.
#[derive(Debug, Default, Clone, Copy)]
pub struct Uniform;

impl ExplorationStrategy for Uniform {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn probabilities(&self, q_values: &[f64], _temperature: f64) -> Result<Vec<f64>, PolicyError> {
        if q_values.is_empty() {
            return Err(PolicyError::EmptyActionSet);
        }
        Ok(vec![1.0 / q_values.len() as f64; q_values.len()])
    }
}

type StrategyCtor = fn() -> Box<dyn ExplorationStrategy>;

/// Exploration strategies by name.
#[derive(Clone)]
pub struct ExplorationRegistry {
    entries: BTreeMap<&'static str, StrategyCtor>,
}

impl ExplorationRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, ctor: StrategyCtor) {
        self.entries.insert(name, ctor);
    }

    pub fn create(&self, name: &str) -> Option<Box<dyn ExplorationStrategy>> {
        self.entries.get(name).map(|ctor| ctor())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for ExplorationRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("boltzmann", || Box::new(Boltzmann));
        r.register("boltzmann-literal", || Box::new(LiteralBoltzmann));
        r.register("uniform", || Box::new(Uniform));
        r
    }
}

impl fmt::Debug for ExplorationRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

/// Greedy if a uniform draw is at least epsilon, otherwise a sample from the
/// strategy's distribution.
pub fn select_action(
    q_values: &[f64],
    state: &ExplorationState,
    strategy: &dyn ExplorationStrategy,
    rng: &mut dyn RngCore,
) -> Result<usize, PolicyError> {
    if q_values.is_empty() {
        return Err(PolicyError::EmptyActionSet);
    }
    let r: f64 = rng.random();
    if r >= state.epsilon {
        return Ok(argmax(q_values));
    }
    let probs = strategy.probabilities(q_values, state.temperature)?;
    Ok(sample_index(&probs, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(epsilon: f64, temperature: f64) -> ExplorationState {
        ExplorationState {
            epsilon,
            epsilon_min: 0.0,
            decay: 1.0,
            temperature,
        }
    }

    #[test]
    fn symmetric_q_is_uniform() {
        for tau in [1e-3, 1.0, 1e6] {
            let p = boltzmann_probs(&[2.5, 2.5, 2.5], tau).unwrap();
            for v in p {
                assert!((v - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_two_actions() {
        let p = boltzmann_probs(&[1.0, 0.0], 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!((p[0] - e / (e + 1.0)).abs() < 1e-12);
        assert!((p[0] - 0.7311).abs() < 1e-4);
        assert!((p[1] - 0.2689).abs() < 1e-4);
        let p = boltzmann_probs(&[1.0, 0.0], 0.01).unwrap();
        assert!(p[0] > 1.0 - 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(boltzmann_probs(&[], 1.0), Err(PolicyError::EmptyActionSet));
        assert_eq!(
            boltzmann_probs(&[1.0], 0.0),
            Err(PolicyError::InvalidTemperature(0.0))
        );
        assert_eq!(
            boltzmann_probs(&[1.0, f64::NAN], 1.0),
            Err(PolicyError::NonFinite)
        );
        assert_eq!(
            boltzmann_probs(&[f64::INFINITY], 1.0),
            Err(PolicyError::NonFinite)
        );
    }

    #[test]
    fn literal_form_clamps_and_renormalizes() {
        let p = boltzmann_probs_literal(&[1.0, -1.0, 2.0], 1.0).unwrap();
        assert_eq!(p[1], 0.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // e^1 * 1 vs e^2 * 2
        let ratio = p[2] / p[0];
        assert!((ratio - 2.0 * std::f64::consts::E).abs() < 1e-9);
        let fallback = boltzmann_probs_literal(&[-1.0, -2.0], 1.0).unwrap();
        assert_eq!(fallback, boltzmann_probs(&[-1.0, -2.0], 1.0).unwrap());
    }

    #[test]
    fn epsilon_zero_is_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = select_action(&[0.1, 0.9, 0.9], &state(0.0, 1.0), &Boltzmann, &mut rng).unwrap();
            assert_eq!(a, 1);
        }
    }

    #[test]
    fn cold_boltzmann_exploration_is_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = [0.0, 0.3, 0.2];
        let hits = (0..10_000)
            .filter(|_| select_action(&q, &state(1.0, 0.001), &Boltzmann, &mut rng).unwrap() == 1)
            .count();
        assert_eq!(hits, 10_000);
    }

    #[test]
    fn uniform_strategy_covers_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[select_action(&[9.0, 0.0, 0.0, 0.0], &state(1.0, 1.0), &Uniform, &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn decay_reaches_floor() {
        let mut s = ExplorationState {
            epsilon: 1.0,
            epsilon_min: 0.05,
            decay: 0.99,
            temperature: 1.0,
        };
        s.decay_epsilon();
        assert_eq!(s.epsilon, 0.99);
        s.epsilon = 0.05;
        s.decay_epsilon();
        assert_eq!(s.epsilon, 0.05);
        s.epsilon = 1.0;
        s.decay = 0.995;
        for _ in 0..1000 {
            s.decay_epsilon();
        }
        assert_eq!(s.epsilon, 0.05);
    }

    #[test]
    fn registry_lookup() {
        let r = ExplorationRegistry::default();
        assert_eq!(r.create("boltzmann").unwrap().name(), "boltzmann");
        assert_eq!(r.create("uniform").unwrap().name(), "uniform");
        assert_eq!(r.create("boltzmann-literal").unwrap().name(), "boltzmann-literal");
        assert!(r.create("softmax").is_none());
        assert_eq!(r.names().count(), 3);
    }

    proptest! {
        #[test]
        fn probabilities_are_a_distribution(
            q in prop::collection::vec(-1e3f64..1e3, 1..50),
            tau_exp in -3.0f64..6.0,
        ) {
            let tau = 10f64.powf(tau_exp);
            let p = boltzmann_probs(&q, tau).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn shift_invariance(
            q in prop::collection::vec(-100f64..100.0, 1..20),
            c in -100f64..100.0,
            tau in 0.01f64..100.0,
        ) {
            let shifted: Vec<f64> = q.iter().map(|v| v + c).collect();
            let a = boltzmann_probs(&q, tau).unwrap();
            let b = boltzmann_probs(&shifted, tau).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
