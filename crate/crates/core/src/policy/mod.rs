//! The admission agent: state encoding, the priority-weight action grid, the
//! window prioritizer, exploration, and the DQN learner.

mod dqn;
mod exploration;
mod mlp;
mod replay;

pub use dqn::{td_train_step, AgentConfig, DqnAgent};
pub use exploration::{
    argmax, boltzmann_probs, boltzmann_probs_literal, sample_index, select_action, Boltzmann,
    ExplorationRegistry, ExplorationState, ExplorationStrategy, LiteralBoltzmann, Uniform,
};
pub use mlp::{Gradients, Mlp};
pub use replay::{Experience, ReplayMemory};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::slicegen::{SliceRequest, SliceType};
use crate::substrate::SubstrateNetwork;

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("temperature must be positive, got {0}")]
    InvalidTemperature(f64),
    #[error("non-finite Q-value")]
    NonFinite,
    #[error("empty action set")]
    EmptyActionSet,
    #[error("unknown exploration strategy {0:?}")]
    UnknownStrategy(String),
    #[error("state has {got} entries, network expects {want}")]
    StateSize { got: usize, want: usize },
}

/// Availability ratios: nodes in id order, then links in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn ratio(available: u32, capacity: u32) -> f64 {
    if capacity == 0 {
        1.0
    } else {
        available as f64 / capacity as f64
    }
}

pub fn encode_state(sn: &SubstrateNetwork) -> StateVector {
    let nodes = sn
        .nodes()
        .iter()
        .map(|n| ratio(n.cpu_available(), n.cpu_capacity));
    let links = sn.links().iter().map(|l| ratio(l.bw_available(), l.bw_capacity));
    StateVector(nodes.chain(links).collect())
}

/// Per-type priority weights, each in 0..=10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub p_embb: u8,
    pub p_urllc: u8,
    pub p_mmtc: u8,
}

impl Action {
    pub const MAX_WEIGHT: u8 = 10;

    pub fn weight(&self, t: SliceType) -> u8 {
        match t {
            SliceType::Embb => self.p_embb,
            SliceType::Urllc => self.p_urllc,
            SliceType::Mmtc => self.p_mmtc,
        }
    }
}

/// The grid `{0, step, 2*step, ...} <= 10` in each coordinate, indexed with
/// eMBB as the slowest-varying coordinate and mMTC the fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpace {
    levels: Vec<u8>,
}

impl ActionSpace {
    pub fn new(step: u8) -> Self {
        assert!((1..=Action::MAX_WEIGHT).contains(&step), "step must be in 1..=10");
        Self {
            levels: (0..=Action::MAX_WEIGHT).step_by(step as usize).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len().pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn action(&self, index: usize) -> Action {
        let n = self.levels.len();
        assert!(index < self.len(), "action index {index} out of range");
        Action {
            p_embb: self.levels[index / (n * n)],
            p_urllc: self.levels[(index / n) % n],
            p_mmtc: self.levels[index % n],
        }
    }

    pub fn index_of(&self, a: Action) -> Option<usize> {
        let pos = |w: u8| self.levels.iter().position(|&l| l == w);
        let n = self.levels.len();
        Some((pos(a.p_embb)? * n + pos(a.p_urllc)?) * n + pos(a.p_mmtc)?)
    }
}

/// Multipliers applied to the agent's weights: `priority = level * weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevelWeights {
    pub highest: u32,
    pub medium: u32,
    pub lowest: u32,
}

impl Default for LevelWeights {
    fn default() -> Self {
        Self {
            highest: 3,
            medium: 2,
            lowest: 1,
        }
    }
}

impl LevelWeights {
    pub fn level(&self, t: SliceType) -> u32 {
        match t {
            SliceType::Urllc => self.highest,
            SliceType::Embb => self.medium,
            SliceType::Mmtc => self.lowest,
        }
    }

    pub fn priority(&self, t: SliceType, action: Action) -> u32 {
        self.level(t) * action.weight(t) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prioritized<'a> {
    pub request: &'a SliceRequest,
    pub priority: u32,
}

/// Orders a window by priority (descending), then arrival, then id.
pub fn prioritize<'a>(
    window: &'a [SliceRequest],
    action: Action,
    levels: &LevelWeights,
) -> Vec<Prioritized<'a>> {
    let mut out: Vec<Prioritized<'a>> = window
        .iter()
        .map(|r| Prioritized {
            request: r,
            priority: levels.priority(r.stype, action),
        })
        .collect();
    out.sort_by(|a, b| {
        b.priority
            .cmp(&a.priority)
            .then(a.request.arrival_time.total_cmp(&b.request.arrival_time))
            .then(a.request.id.cmp(&b.request.id))
    });
    out
}
