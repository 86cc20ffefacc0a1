use serde::{Deserialize, Serialize};

use crate::policy::{AgentConfig, ExplorationRegistry, LevelWeights};
use crate::reward::EconomicParams;
use crate::slicegen::{DemandConfig, TrafficMix};
use crate::substrate::CapacityProfile;

use super::SchemeRegistry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubstrateConfig {
    pub n_nodes: usize,
    pub attach_m: usize,
    pub edge_fraction: f64,
    pub capacity: CapacityProfile,
}

impl Default for SubstrateConfig {
    fn default() -> Self {
        Self {
            n_nodes: 64,
            attach_m: 2,
            edge_fraction: 0.5,
            capacity: CapacityProfile::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficConfig {
    /// Mean arrivals per unit of simulation time.
    pub arrival_rate: f64,
    pub mix: TrafficMix,
    pub demand: DemandConfig,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            arrival_rate: 8.0,
            mix: TrafficMix::default_mix(),
            demand: DemandConfig::default(),
        }
    }
}

/// Which priority the delay penalty is weighted by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyPriority {
    /// `level(type) * weight(type)`, the same priority the queue is sorted by.
    Action,
    /// `level(type) * 10`: fixed by slice type, independent of the action.
    SliceType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub seed: u64,
    /// Registered admission scheme, `depsac` or `dsara` by default.
    pub mode: String,
    pub n_windows: usize,
    pub window_length: f64,
    /// Time to serve one request; the k-th request of a window (0-based)
    /// is served `(k + 1) * service_time` after the window closes.
    pub service_time: f64,
    pub penalty_priority: PenaltyPriority,
    pub substrate: SubstrateConfig,
    pub traffic: TrafficConfig,
    pub economics: EconomicParams,
    pub agent: AgentConfig,
    pub levels: LevelWeights,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            mode: "depsac".into(),
            n_windows: 300,
            window_length: 1.0,
            service_time: 0.01,
            penalty_priority: PenaltyPriority::Action,
            substrate: SubstrateConfig::default(),
            traffic: TrafficConfig::default(),
            economics: EconomicParams::default(),
            agent: AgentConfig::default(),
            levels: LevelWeights::default(),
        }
    }
}

impl SimulationConfig {
    pub fn horizon(&self) -> f64 {
        self.n_windows as f64 * self.window_length
    }

    /// Every violation across all blocks; empty means the config can run.
    pub fn validate(&self, schemes: &SchemeRegistry, explorers: &ExplorationRegistry) -> Vec<String> {
        let mut out = Vec::new();
        if schemes.create(&self.mode).is_none() {
            let known: Vec<_> = schemes.names().collect();
            out.push(format!("mode {:?} is not one of {}", self.mode, known.join(", ")));
        }
        if self.n_windows == 0 {
            out.push("n_windows must be at least 1".into());
        }
        if !(self.window_length > 0.0 && self.window_length.is_finite()) {
            out.push("window_length must be positive".into());
        }
        if !(self.service_time >= 0.0 && self.service_time.is_finite()) {
            out.push("service_time must be non-negative".into());
        }

        let s = &self.substrate;
        if s.attach_m < 1 {
            out.push("substrate.attach_m must be at least 1".into());
        }
        if s.n_nodes < s.attach_m + 1 {
            out.push("substrate.n_nodes must exceed substrate.attach_m".into());
        }
        if !(0.0..=1.0).contains(&s.edge_fraction) {
            out.push("substrate.edge_fraction must be in [0, 1]".into());
        }

        let t = &self.traffic;
        if !(t.arrival_rate > 0.0 && t.arrival_rate.is_finite()) {
            out.push("traffic.arrival_rate must be positive".into());
        }
        if let Err(e) = t.mix.validate() {
            out.push(format!("traffic.mix: {e}"));
        }
        out.extend(
            t.demand
                .validate()
                .into_iter()
                .map(|e| format!("traffic.demand.{e}")),
        );
        out.extend(
            self.economics
                .validate()
                .into_iter()
                .map(|e| format!("economics.{e}")),
        );
        out.extend(self.agent.validate(explorers));
        out
    }
}
