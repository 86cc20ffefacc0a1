//! Windowed event loop: batch arrivals, prioritize with the agent's action,
//! embed in queue order, reward, learn, and release expired slices.

mod config;
mod metrics;
mod scheme;

pub use config::{PenaltyPriority, SimulationConfig, SubstrateConfig, TrafficConfig};
pub use metrics::{
    compute_acceptance, compute_consumption, compute_delay_metric, compute_queue_delay, cumulative_profit,
    write_events_log, write_windows_csv, RequestEvent, WindowRecord, WINDOW_COLUMNS,
};
pub use scheme::{AdmissionScheme, DePsac, Dsara, SchemeRegistry};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::allocator::{map_request, Placement};
use crate::policy::{
    encode_state, prioritize, Action, ActionSpace, DqnAgent, Experience, ExplorationRegistry, PolicyError,
};
use crate::reward::{slice_reward, window_reward, EconomicParams, RewardBreakdown, RewardError};
use crate::slicegen::{generate_trace, SliceGenError, SliceRequest};
use crate::substrate::{SubstrateError, SubstrateNetwork};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
    #[error(transparent)]
    Trace(#[from] SliceGenError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("conservation violated: {0}")]
    Conservation(String),
    #[error("pinned action {0:?} is not on the action grid")]
    PinnedAction(Action),
    #[error("request {id} arrives at {arrival}, after its service time {service}")]
    ArrivalAfterService { id: u64, arrival: f64, service: f64 },
}

/// Independent random streams derived from one experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Trace = 0,
    Substrate = 1,
    AgentInit = 2,
    Exploration = 3,
    Replay = 4,
}

pub fn stream_seed(seed: u64, stream: Stream) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSlice {
    pub nslr_id: u64,
    pub placement: Placement,
    pub expiry_time: f64,
}

#[derive(Debug)]
pub struct Simulation {
    config: SimulationConfig,
    scheme_name: &'static str,
    econ: EconomicParams,
    sn: SubstrateNetwork,
    agent: DqnAgent,
    actions: ActionSpace,
    /// Sorted by (expiry, id).
    active: Vec<ActiveSlice>,
    next_window: usize,
    audit: bool,
    events: Option<Vec<RequestEvent>>,
}

impl Simulation {
    /// Validates `config` and builds the agent for `sn`.
    pub fn new(config: SimulationConfig, sn: SubstrateNetwork) -> Result<Self, EngineError> {
        let schemes = SchemeRegistry::default();
        let explorers = ExplorationRegistry::default();
        let problems = config.validate(&schemes, &explorers);
        if !problems.is_empty() {
            return Err(EngineError::Config(problems));
        }
        let scheme = schemes.create(&config.mode).expect("validated");
        let strategy_name = scheme.exploration(&config.agent);
        let strategy = explorers
            .create(strategy_name)
            .ok_or_else(|| PolicyError::UnknownStrategy(strategy_name.to_string()))?;
        let actions = ActionSpace::new(config.agent.action_step);
        let state_size = sn.nodes().len() + sn.links().len();
        let agent = DqnAgent::new(
            &config.agent,
            state_size,
            actions.len(),
            strategy,
            [
                stream_seed(config.seed, Stream::AgentInit),
                stream_seed(config.seed, Stream::Exploration),
                stream_seed(config.seed, Stream::Replay),
            ],
        );
        Ok(Self {
            econ: scheme.economics(&config.economics),
            scheme_name: scheme.name(),
            config,
            sn,
            agent,
            actions,
            active: Vec::new(),
            next_window: 0,
            audit: false,
            events: None,
        })
    }

    /// Check conservation after every allocation and release.
    pub fn set_audit(&mut self, on: bool) {
        self.audit = on;
    }

    pub fn set_event_logging(&mut self, on: bool) {
        self.events = if on { Some(Vec::new()) } else { None };
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn network(&self) -> &SubstrateNetwork {
        &self.sn
    }

    pub fn agent(&self) -> &DqnAgent {
        &self.agent
    }

    pub fn economics(&self) -> &EconomicParams {
        &self.econ
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.actions
    }

    pub fn active_slices(&self) -> &[ActiveSlice] {
        &self.active
    }

    pub fn events(&self) -> &[RequestEvent] {
        self.events.as_deref().unwrap_or(&[])
    }

    pub fn take_events(&mut self) -> Vec<RequestEvent> {
        self.events.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn check_conservation(&self) -> Result<(), EngineError> {
        let cpu: u64 = self.active.iter().map(|a| a.placement.total_cpu()).sum();
        let bw: u64 = self.active.iter().map(|a| a.placement.total_bw()).sum();
        if cpu != self.sn.allocated_cpu() || bw != self.sn.allocated_bw() {
            return Err(EngineError::Conservation(format!(
                "active slices hold cpu {cpu} bw {bw}, substrate shows cpu {} bw {}",
                self.sn.allocated_cpu(),
                self.sn.allocated_bw()
            )));
        }
        Ok(())
    }

    /// Releases every slice whose expiry is at or before `now`.
    pub fn expire_until(&mut self, now: f64) -> Result<(), EngineError> {
        while self.active.first().is_some_and(|a| a.expiry_time <= now) {
            let slice = self.active.remove(0);
            self.sn.release(&slice.placement)?;
            if self.audit {
                self.check_conservation()?;
            }
        }
        Ok(())
    }

    /// Runs out every active slice.
    pub fn drain(&mut self) -> Result<(), EngineError> {
        self.expire_until(f64::INFINITY)
    }

    fn penalty_priority(&self, req: &SliceRequest, action: Action) -> f64 {
        let levels = &self.config.levels;
        match self.config.penalty_priority {
            PenaltyPriority::Action => levels.priority(req.stype, action) as f64,
            PenaltyPriority::SliceType => (levels.level(req.stype) * Action::MAX_WEIGHT as u32) as f64,
        }
    }

    /// Processes the next window. `requests` are the arrivals collected in
    /// it; `pinned` overrides the agent's choice of action.
    pub fn run_window(
        &mut self,
        requests: &[SliceRequest],
        pinned: Option<Action>,
    ) -> Result<WindowRecord, EngineError> {
        let w = self.next_window;
        self.next_window += 1;
        let t_w = (w + 1) as f64 * self.config.window_length;
        self.expire_until(t_w)?;

        let state = encode_state(&self.sn);
        let action_index = match pinned {
            Some(a) => self.actions.index_of(a).ok_or(EngineError::PinnedAction(a))?,
            None => self.agent.select(&state)?,
        };
        let action = self.actions.action(action_index);
        let mut record = WindowRecord::empty(w, self.scheme_name, action);
        record.epsilon = self.agent.exploration().epsilon;

        let mut breakdowns = Vec::with_capacity(requests.len());
        for (k, item) in prioritize(requests, action, &self.config.levels)
            .iter()
            .enumerate()
        {
            let req = item.request;
            let t_svc = t_w + (k + 1) as f64 * self.config.service_time;
            if req.arrival_time > t_svc {
                return Err(EngineError::ArrivalAfterService {
                    id: req.id,
                    arrival: req.arrival_time,
                    service: t_svc,
                });
            }
            self.expire_until(t_svc)?;
            record.offered[req.stype] += 1;
            let queue_delay = t_svc - req.arrival_time;
            let (breakdown, rejection) = match map_request(&self.sn, req) {
                Ok(placement) => {
                    self.sn.allocate(&placement)?;
                    let priority = self.penalty_priority(req, action);
                    let b = slice_reward(req, &placement, &self.sn, queue_delay, priority, &self.econ);
                    let expiry_time = t_svc + req.operational_time;
                    let at = self
                        .active
                        .partition_point(|a| (a.expiry_time, a.nslr_id) <= (expiry_time, req.id));
                    self.active.insert(
                        at,
                        ActiveSlice {
                            nslr_id: req.id,
                            placement,
                            expiry_time,
                        },
                    );
                    if self.audit {
                        self.check_conservation()?;
                    }
                    record.accepted[req.stype] += 1;
                    record.profit[req.stype] += b.profit;
                    record.queue_delay_sum[req.stype] += queue_delay;
                    record.delay_sum[req.stype] += expiry_time - req.arrival_time;
                    (b, None)
                }
                Err(rejection) => (RewardBreakdown::zero(), Some(rejection.to_string())),
            };
            record.reward_total += breakdown.reward;
            record.penalty_total += breakdown.penalty;
            breakdowns.push(breakdown);
            if let Some(events) = self.events.as_mut() {
                events.push(RequestEvent {
                    window_index: w,
                    nslr_id: req.id,
                    stype: req.stype,
                    position: k,
                    priority: item.priority,
                    service_time: t_svc,
                    rejection,
                    profit: breakdown.profit,
                    penalty: breakdown.penalty,
                    reward: breakdown.reward,
                    queue_delay,
                });
            }
        }

        record.r = window_reward(&breakdowns, &self.sn, self.config.window_length, &self.econ)?;
        record.consumption = compute_consumption(&self.sn);
        let next_state = encode_state(&self.sn);
        record.loss = self.agent.observe(Experience {
            state,
            action_index,
            reward: record.r,
            next_state,
        });
        self.agent.decay_epsilon();
        Ok(record)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Use this trace instead of generating one.
    pub trace: Option<Vec<SliceRequest>>,
    /// Use this substrate instead of generating one.
    pub network: Option<SubstrateNetwork>,
    /// Window `w` plays `pinned_actions[w % len]` instead of asking the agent.
    pub pinned_actions: Option<Vec<Action>>,
    pub audit: bool,
    pub log_events: bool,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub records: Vec<WindowRecord>,
    pub trace: Vec<SliceRequest>,
    pub events: Vec<RequestEvent>,
    pub simulation: Simulation,
}

pub fn generate_network(config: &SimulationConfig) -> Result<SubstrateNetwork, EngineError> {
    let s = &config.substrate;
    Ok(SubstrateNetwork::generate(
        s.n_nodes,
        s.attach_m,
        s.edge_fraction,
        &s.capacity,
        stream_seed(config.seed, Stream::Substrate),
    )?)
}

pub fn generate_experiment_trace(config: &SimulationConfig) -> Result<Vec<SliceRequest>, EngineError> {
    let t = &config.traffic;
    Ok(generate_trace(
        config.horizon(),
        t.arrival_rate,
        &t.mix,
        &t.demand,
        stream_seed(config.seed, Stream::Trace),
    )?)
}

/// Splits `trace` into per-window batches; arrivals past the horizon are dropped.
pub fn batch_windows(trace: &[SliceRequest], window_length: f64, n_windows: usize) -> Vec<Vec<SliceRequest>> {
    let mut windows = vec![Vec::new(); n_windows];
    for req in trace {
        let w = (req.arrival_time / window_length).floor();
        if w >= 0.0 && (w as usize) < n_windows {
            windows[w as usize].push(req.clone());
        }
    }
    windows
}

pub fn run_experiment(config: &SimulationConfig) -> Result<ExperimentOutput, EngineError> {
    run_experiment_with(config, RunOptions::default())
}

/// Runs every window, then lets all admitted slices run out.
pub fn run_experiment_with(
    config: &SimulationConfig,
    options: RunOptions,
) -> Result<ExperimentOutput, EngineError> {
    let problems = config.validate(&SchemeRegistry::default(), &ExplorationRegistry::default());
    if !problems.is_empty() {
        return Err(EngineError::Config(problems));
    }
    let sn = match options.network {
        Some(sn) => sn,
        None => generate_network(config)?,
    };
    let trace = match options.trace {
        Some(t) => t,
        None => generate_experiment_trace(config)?,
    };
    let mut sim = Simulation::new(config.clone(), sn)?;
    sim.set_audit(options.audit);
    sim.set_event_logging(options.log_events);
    let windows = batch_windows(&trace, config.window_length, config.n_windows);
    let mut records = Vec::with_capacity(config.n_windows);
    for (w, batch) in windows.iter().enumerate() {
        let pinned = options
            .pinned_actions
            .as_ref()
            .filter(|p| !p.is_empty())
            .map(|p| p[w % p.len()]);
        records.push(sim.run_window(batch, pinned)?);
    }
    sim.drain()?;
    let events = sim.take_events();
    Ok(ExperimentOutput {
        records,
        trace,
        events,
        simulation: sim,
    })
}
