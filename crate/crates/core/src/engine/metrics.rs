//! Per-window records, aggregate metrics, and the CSV/log writers.

use std::io::{self, Write};

use crate::policy::Action;
use crate::slicegen::{PerType, SliceType};
use crate::substrate::SubstrateNetwork;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub window_index: usize,
    pub mode: String,
    /// Normalized window reward.
    pub r: f64,
    pub profit: PerType<f64>,
    pub offered: PerType<u32>,
    pub accepted: PerType<u32>,
    /// Sum over accepted requests of `finish - arrival`.
    pub delay_sum: PerType<f64>,
    /// Sum over accepted requests of `service - arrival`.
    pub queue_delay_sum: PerType<f64>,
    pub reward_total: f64,
    pub penalty_total: f64,
    pub consumption: f64,
    pub action: Action,
    pub epsilon: f64,
    pub loss: Option<f64>,
}

impl WindowRecord {
    pub fn empty(window_index: usize, mode: &str, action: Action) -> Self {
        Self {
            window_index,
            mode: mode.to_string(),
            r: 0.0,
            profit: PerType::default(),
            offered: PerType::default(),
            accepted: PerType::default(),
            delay_sum: PerType::default(),
            queue_delay_sum: PerType::default(),
            reward_total: 0.0,
            penalty_total: 0.0,
            consumption: 0.0,
            action,
            epsilon: 0.0,
            loss: None,
        }
    }

    pub fn profit_total(&self) -> f64 {
        self.profit.embb + self.profit.urllc + self.profit.mmtc
    }

    pub fn offered_total(&self) -> u32 {
        self.offered.embb + self.offered.urllc + self.offered.mmtc
    }

    pub fn accepted_total(&self) -> u32 {
        self.accepted.embb + self.accepted.urllc + self.accepted.mmtc
    }

    pub fn mean_delay(&self, filter: Option<SliceType>) -> Option<f64> {
        mean_over(std::slice::from_ref(self), filter, |r| &r.delay_sum)
    }

    pub fn mean_queue_delay(&self, filter: Option<SliceType>) -> Option<f64> {
        mean_over(std::slice::from_ref(self), filter, |r| &r.queue_delay_sum)
    }
}

fn select<T: Copy + std::iter::Sum<T>>(v: &PerType<T>, filter: Option<SliceType>) -> T {
    match filter {
        Some(t) => v[t],
        None => v.iter().map(|(_, &x)| x).sum(),
    }
}

fn mean_over(
    records: &[WindowRecord],
    filter: Option<SliceType>,
    sums: impl Fn(&WindowRecord) -> &PerType<f64>,
) -> Option<f64> {
    let n: u64 = records.iter().map(|r| select(&r.accepted, filter) as u64).sum();
    if n == 0 {
        return None;
    }
    Some(records.iter().map(|r| select(sums(r), filter)).sum::<f64>() / n as f64)
}

/// Mean of the allocated CPU share and the allocated bandwidth share.
pub fn compute_consumption(sn: &SubstrateNetwork) -> f64 {
    let share = |used: u64, cap: u64| if cap == 0 { 0.0 } else { used as f64 / cap as f64 };
    (share(sn.allocated_bw(), sn.total_bw_capacity()) + share(sn.allocated_cpu(), sn.total_cpu_capacity()))
        / 2.0
}

/// Cumulative accepted / offered; `None` when nothing was offered.
pub fn compute_acceptance(records: &[WindowRecord], filter: Option<SliceType>) -> Option<f64> {
    let offered: u64 = records.iter().map(|r| select(&r.offered, filter) as u64).sum();
    if offered == 0 {
        return None;
    }
    let accepted: u64 = records.iter().map(|r| select(&r.accepted, filter) as u64).sum();
    Some(accepted as f64 / offered as f64)
}

/// Mean `finish - arrival` over accepted slices; `None` for an empty set.
pub fn compute_delay_metric(records: &[WindowRecord], filter: Option<SliceType>) -> Option<f64> {
    mean_over(records, filter, |r| &r.delay_sum)
}

/// Mean `service - arrival` over accepted slices; `None` for an empty set.
pub fn compute_queue_delay(records: &[WindowRecord], filter: Option<SliceType>) -> Option<f64> {
    mean_over(records, filter, |r| &r.queue_delay_sum)
}

pub fn cumulative_profit(records: &[WindowRecord], filter: Option<SliceType>) -> f64 {
    records.iter().map(|r| select(&r.profit, filter)).sum()
}

pub const WINDOW_COLUMNS: &[&str] = &[
    "window_index",
    "R",
    "profit_total",
    "profit_embb",
    "profit_urllc",
    "profit_mmtc",
    "offered_total",
    "offered_embb",
    "offered_urllc",
    "offered_mmtc",
    "accepted_total",
    "accepted_embb",
    "accepted_urllc",
    "accepted_mmtc",
    "delay_total",
    "delay_embb",
    "delay_urllc",
    "delay_mmtc",
    "consumption",
    "queue_delay_total",
    "queue_delay_embb",
    "queue_delay_urllc",
    "queue_delay_mmtc",
    "reward_total",
    "penalty_total",
    "p_embb",
    "p_urllc",
    "p_mmtc",
    "epsilon",
    "loss",
    "mode",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

const FILTERS: [Option<SliceType>; 4] = [
    None,
    Some(SliceType::Embb),
    Some(SliceType::Urllc),
    Some(SliceType::Mmtc),
];

fn window_row(r: &WindowRecord) -> Vec<String> {
    let mut row = vec![r.window_index.to_string(), r.r.to_string()];
    row.extend(FILTERS.iter().map(|&f| select(&r.profit, f).to_string()));
    row.extend(FILTERS.iter().map(|&f| select(&r.offered, f).to_string()));
    row.extend(FILTERS.iter().map(|&f| select(&r.accepted, f).to_string()));
    row.extend(FILTERS.iter().map(|&f| opt(r.mean_delay(f))));
    row.push(r.consumption.to_string());
    row.extend(FILTERS.iter().map(|&f| opt(r.mean_queue_delay(f))));
    row.extend([
        r.reward_total.to_string(),
        r.penalty_total.to_string(),
        r.action.p_embb.to_string(),
        r.action.p_urllc.to_string(),
        r.action.p_mmtc.to_string(),
        r.epsilon.to_string(),
        opt(r.loss),
        r.mode.clone(),
    ]);
    row
}

/// Header plus one row per window. Absent values are empty fields.
pub fn write_windows_csv<W: Write>(records: &[WindowRecord], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(WINDOW_COLUMNS)?;
    for r in records {
        w.write_record(window_row(r))?;
    }
    w.flush()
}

/// What happened to one request.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestEvent {
    pub window_index: usize,
    pub nslr_id: u64,
    pub stype: SliceType,
    pub position: usize,
    pub priority: u32,
    pub service_time: f64,
    /// `None` when accepted, otherwise the rejection reason.
    pub rejection: Option<String>,
    pub profit: f64,
    pub penalty: f64,
    pub reward: f64,
    pub queue_delay: f64,
}

pub fn write_events_log<W: Write>(events: &[RequestEvent], mut out: W) -> io::Result<()> {
    for e in events {
        let outcome = match &e.rejection {
            None => "accept".to_string(),
            Some(reason) => format!("reject ({reason})"),
        };
        writeln!(
            out,
            "w={} id={} type={} pos={} priority={} t_svc={} {} profit={} penalty={} reward={} delay={}",
            e.window_index,
            e.nslr_id,
            e.stype,
            e.position,
            e.priority,
            e.service_time,
            outcome,
            e.profit,
            e.penalty,
            e.reward,
            e.queue_delay
        )?;
    }
    Ok(())
}
