//! DQN learner: evaluation and target networks, replay memory, and the
//! exploration schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    select_action, Experience, ExplorationRegistry, ExplorationState, ExplorationStrategy, Gradients, Mlp,
    PolicyError, ReplayMemory, StateVector,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub gamma: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub target_sync_every: u64,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    pub epsilon_decay: f64,
    pub temperature: f64,
    pub action_step: u8,
    pub exploration: String,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 64],
            learning_rate: 1e-3,
            gamma: 0.9,
            replay_capacity: 10_000,
            batch_size: 32,
            target_sync_every: 200,
            epsilon_start: 1.0,
            epsilon_min: 0.05,
            epsilon_decay: 0.995,
            temperature: 1.0,
            action_step: 2,
            exploration: "boltzmann".into(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self, registry: &ExplorationRegistry) -> Vec<String> {
        let mut out = Vec::new();
        if self.hidden.contains(&0) {
            out.push("agent.hidden widths must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            out.push("agent.learning_rate must be positive".into());
        }
        if !(0.0..1.0).contains(&self.gamma) {
            out.push("agent.gamma must be in [0, 1)".into());
        }
        if self.replay_capacity == 0 {
            out.push("agent.replay_capacity must be positive".into());
        }
        if self.batch_size == 0 {
            out.push("agent.batch_size must be positive".into());
        }
        if self.target_sync_every == 0 {
            out.push("agent.target_sync_every must be positive".into());
        }
        for (name, v) in [
            ("epsilon_start", self.epsilon_start),
            ("epsilon_min", self.epsilon_min),
            ("epsilon_decay", self.epsilon_decay),
        ] {
            if !(0.0..=1.0).contains(&v) {
                out.push(format!("agent.{name} must be in [0, 1]"));
            }
        }
        if self.epsilon_min > self.epsilon_start {
            out.push("agent.epsilon_min must not exceed agent.epsilon_start".into());
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            out.push("temperature must be positive".into());
        }
        if !(1..=10).contains(&self.action_step) {
            out.push("agent.action_step must be in 1..=10".into());
        }
        if registry.create(&self.exploration).is_none() {
            let known: Vec<_> = registry.names().collect();
            out.push(format!(
                "agent.exploration {:?} is not one of {}",
                self.exploration,
                known.join(", ")
            ));
        }
        out
    }
}

#[derive(Debug)]
pub struct DqnAgent {
    eval: Mlp,
    target: Mlp,
    memory: ReplayMemory,
    exploration: ExplorationState,
    strategy: Box<dyn ExplorationStrategy>,
    gamma: f64,
    learning_rate: f64,
    batch_size: usize,
    sync_every: u64,
    train_steps: u64,
    explore_rng: ChaCha8Rng,
    replay_rng: ChaCha8Rng,
}

impl DqnAgent {
    /// Seeds: network init, exploration draws, replay sampling.
    pub fn new(
        config: &AgentConfig,
        state_size: usize,
        action_count: usize,
        strategy: Box<dyn ExplorationStrategy>,
        seeds: [u64; 3],
    ) -> Self {
        let mut sizes = vec![state_size];
        sizes.extend(&config.hidden);
        sizes.push(action_count);
        let eval = Mlp::new(&sizes, &mut ChaCha8Rng::seed_from_u64(seeds[0]));
        Self {
            target: eval.clone(),
            eval,
            memory: ReplayMemory::new(config.replay_capacity),
            exploration: ExplorationState {
                epsilon: config.epsilon_start,
                epsilon_min: config.epsilon_min,
                decay: config.epsilon_decay,
                temperature: config.temperature,
            },
            strategy,
            gamma: config.gamma,
            learning_rate: config.learning_rate,
            batch_size: config.batch_size,
            sync_every: config.target_sync_every,
            train_steps: 0,
            explore_rng: ChaCha8Rng::seed_from_u64(seeds[1]),
            replay_rng: ChaCha8Rng::seed_from_u64(seeds[2]),
        }
    }

    pub fn strategy_name(&self) -> &'static str {
        self.strategy.name()
    }

    pub fn exploration(&self) -> &ExplorationState {
        &self.exploration
    }

    pub fn exploration_mut(&mut self) -> &mut ExplorationState {
        &mut self.exploration
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    pub fn eval_net(&self) -> &Mlp {
        &self.eval
    }

    pub fn target_net(&self) -> &Mlp {
        &self.target
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    pub fn q_values(&self, state: &StateVector) -> Result<Vec<f64>, PolicyError> {
        if state.len() != self.eval.input_size() {
            return Err(PolicyError::StateSize {
                got: state.len(),
                want: self.eval.input_size(),
            });
        }
        Ok(self.eval.forward(state.as_slice()))
    }

    pub fn select(&mut self, state: &StateVector) -> Result<usize, PolicyError> {
        let q = self.q_values(state)?;
        select_action(
            &q,
            &self.exploration,
            self.strategy.as_ref(),
            &mut self.explore_rng,
        )
    }

    pub fn decay_epsilon(&mut self) {
        self.exploration.decay_epsilon();
    }

    pub fn sync_target(&mut self) {
        self.target = self.eval.clone();
    }

    /// Stores the experience, then trains on one sampled batch once the
    /// memory holds at least a batch. Returns the loss if a step was taken.
    pub fn observe(&mut self, e: Experience) -> Option<f64> {
        self.memory.push(e);
        if self.memory.len() < self.batch_size {
            return None;
        }
        let batch: Vec<Experience> = self
            .memory
            .sample(self.batch_size, &mut self.replay_rng)
            .into_iter()
            .cloned()
            .collect();
        let refs: Vec<&Experience> = batch.iter().collect();
        let loss = td_train_step(
            &mut self.eval,
            &self.target,
            &refs,
            self.gamma,
            self.learning_rate,
        );
        self.train_steps += 1;
        if self.train_steps.is_multiple_of(self.sync_every) {
            self.sync_target();
        }
        Some(loss)
    }
}

/// One SGD step on the mean squared TD error against
/// `r + gamma * max_a' target(s', a')`. Returns the loss before the step.
pub fn td_train_step(eval: &mut Mlp, target: &Mlp, batch: &[&Experience], gamma: f64, lr: f64) -> f64 {
    assert!(!batch.is_empty(), "training batch must not be empty");
    let n = batch.len() as f64;
    let mut grads = Gradients::zeros_like(eval);
    let mut loss = 0.0;
    for e in batch {
        let next_max = if gamma == 0.0 {
            0.0
        } else {
            target
                .forward(e.next_state.as_slice())
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let y = e.reward + gamma * next_max;
        eval.accumulate_gradients(e.state.as_slice(), &mut grads, |q| {
            let err = q[e.action_index] - y;
            loss += err * err / n;
            let mut d = vec![0.0; q.len()];
            d[e.action_index] = 2.0 * err / n;
            d
        });
    }
    eval.apply_gradients(&grads, lr);
    loss
}
