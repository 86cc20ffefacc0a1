//! Economics of admitted slices and the delay-penalized reward.
//!
//! Per request: `profit = (revenue_rate - cost_rate) * T_o`,
//! `penalty = delta * priority * delay`, `reward = profit - penalty`.
//! Per window: `R = sum(reward) / max_profit(SN, T)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocator::Placement;
use crate::slicegen::{PerType, SliceRequest, SliceType};
use crate::substrate::{NodeRegion, SubstrateNetwork};

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("max profit is {0}: every revenue margin is non-positive")]
    DegenerateEconomics(f64),
}

/// Money per resource unit per time unit, plus the delay penalty scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EconomicParams {
    pub unit_revenue_cpu: f64,
    pub unit_revenue_bw: f64,
    pub revenue_multiplier: PerType<f64>,
    pub unit_cost_cpu_core: f64,
    pub unit_cost_cpu_edge: f64,
    pub unit_cost_bw: f64,
    /// Money per priority unit per time unit of delay.
    pub penalty_scale: f64,
}

/// Default `penalty_scale`; see [`calibrate_penalty_scale`].
pub const DEFAULT_PENALTY_SCALE: f64 = 4.4;

impl Default for EconomicParams {
    fn default() -> Self {
        Self {
            unit_revenue_cpu: 1.0,
            unit_revenue_bw: 0.5,
            revenue_multiplier: PerType::new(1.0, 1.5, 0.8),
            unit_cost_cpu_core: 0.2,
            unit_cost_cpu_edge: 0.4,
            unit_cost_bw: 0.1,
            penalty_scale: DEFAULT_PENALTY_SCALE,
        }
    }
}

impl EconomicParams {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let fields = [
            ("unit_revenue_cpu", self.unit_revenue_cpu),
            ("unit_revenue_bw", self.unit_revenue_bw),
            ("revenue_multiplier.embb", self.revenue_multiplier.embb),
            ("revenue_multiplier.urllc", self.revenue_multiplier.urllc),
            ("revenue_multiplier.mmtc", self.revenue_multiplier.mmtc),
            ("unit_cost_cpu_core", self.unit_cost_cpu_core),
            ("unit_cost_cpu_edge", self.unit_cost_cpu_edge),
            ("unit_cost_bw", self.unit_cost_bw),
            ("penalty_scale", self.penalty_scale),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                out.push(format!("{name}: must be finite and non-negative"));
            }
        }
        let cost_floor = self.unit_cost_cpu_core.min(self.unit_cost_cpu_edge);
        let any_margin = SliceType::ALL.iter().any(|&t| {
            let m = self.revenue_multiplier[t];
            m * self.unit_revenue_cpu > cost_floor || m * self.unit_revenue_bw > self.unit_cost_bw
        });
        if out.is_empty() && !any_margin {
            out.push("no slice type earns more per unit than it costs; max profit would be zero".into());
        }
        out
    }
}

/// Per-request reward terms. Rejected requests carry [`RewardBreakdown::zero`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RewardBreakdown {
    pub revenue: f64,
    pub cost: f64,
    pub profit: f64,
    pub penalty: f64,
    pub reward: f64,
    pub delay: f64,
    pub priority: f64,
}

impl RewardBreakdown {
    pub fn zero() -> Self {
        Self::default()
    }
}

/// Revenue per time unit for serving `req`.
pub fn revenue_rate(req: &SliceRequest, econ: &EconomicParams) -> f64 {
    econ.revenue_multiplier[req.stype]
        * (econ.unit_revenue_cpu * req.total_cpu() as f64 + econ.unit_revenue_bw * req.total_bw() as f64)
}

/// Operating cost per time unit of a placement. Bandwidth is paid on every
/// substrate link a virtual link crosses.
pub fn cost_rate(placement: &Placement, sn: &SubstrateNetwork, econ: &EconomicParams) -> f64 {
    let cpu: f64 = placement
        .cpu_per_node
        .iter()
        .map(|(&n, &c)| {
            let unit = match sn.node(n).region {
                NodeRegion::Core => econ.unit_cost_cpu_core,
                NodeRegion::Edge => econ.unit_cost_cpu_edge,
            };
            unit * c as f64
        })
        .sum();
    cpu + econ.unit_cost_bw * placement.total_bw() as f64
}

pub fn slice_reward(
    req: &SliceRequest,
    placement: &Placement,
    sn: &SubstrateNetwork,
    delay: f64,
    priority: f64,
    econ: &EconomicParams,
) -> RewardBreakdown {
    debug_assert!(delay >= 0.0);
    let revenue = revenue_rate(req, econ);
    let cost = cost_rate(placement, sn, econ);
    let profit = (revenue - cost) * req.operational_time;
    let penalty = econ.penalty_scale * priority * delay;
    RewardBreakdown {
        revenue,
        cost,
        profit,
        penalty,
        reward: profit - penalty,
        delay,
        priority,
    }
}

/// Profit of running every CPU and bandwidth unit of `sn` for `horizon` at the
/// best non-negative per-unit margin any slice type offers. CPU cost is the
/// capacity-weighted blend of core and edge prices.
pub fn max_profit(sn: &SubstrateNetwork, horizon: f64, econ: &EconomicParams) -> f64 {
    let cpu_total = sn.total_cpu_capacity() as f64;
    let bw_total = sn.total_bw_capacity() as f64;
    let blended_cpu_cost = if cpu_total > 0.0 {
        (sn.region_cpu_capacity(NodeRegion::Core) as f64 * econ.unit_cost_cpu_core
            + sn.region_cpu_capacity(NodeRegion::Edge) as f64 * econ.unit_cost_cpu_edge)
            / cpu_total
    } else {
        0.0
    };
    let best = |margin: &dyn Fn(f64) -> f64| {
        SliceType::ALL
            .iter()
            .map(|&t| margin(econ.revenue_multiplier[t]))
            .fold(0.0_f64, f64::max)
    };
    let cpu_margin = best(&|m| m * econ.unit_revenue_cpu - blended_cpu_cost);
    let bw_margin = best(&|m| m * econ.unit_revenue_bw - econ.unit_cost_bw);
    horizon * cpu_margin * cpu_total + horizon * bw_margin * bw_total
}

/// Normalized window reward.
pub fn window_reward(
    breakdowns: &[RewardBreakdown],
    sn: &SubstrateNetwork,
    horizon: f64,
    econ: &EconomicParams,
) -> Result<f64, RewardError> {
    let max = max_profit(sn, horizon, econ);
    if max <= 0.0 {
        return Err(RewardError::DegenerateEconomics(max));
    }
    Ok(breakdowns.iter().map(|b| b.reward).sum::<f64>() / max)
}

/// Penalty scale under which a median-profit URLLC request, delayed one full
/// `window_length` at priority `urllc_priority`, loses `forfeit` of its profit.
///
/// Profit is estimated on a nominal placement: control plane on core, URLLC
/// user plane on edge, other user plane on core, each virtual link one hop.
pub fn calibrate_penalty_scale(
    demand: &crate::slicegen::DemandConfig,
    econ: &EconomicParams,
    urllc_priority: f64,
    window_length: f64,
    forfeit: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    use crate::slicegen::{build_slice_graph, required_region};
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let d = demand.get(SliceType::Urllc);
    let mut profits: Vec<f64> = (0..samples.max(1))
        .map(|_| {
            let (vnfs, vlinks) = build_slice_graph(SliceType::Urllc, demand, &mut rng);
            let [lo, hi] = d.operational_time;
            let t_o = if lo == hi { lo } else { rng.random_range(lo..hi) };
            let cpu: f64 = vnfs.iter().map(|v| v.cpu_demand as f64).sum();
            let bw: f64 = vlinks.iter().map(|l| l.bw_demand as f64).sum();
            let revenue =
                econ.revenue_multiplier.urllc * (econ.unit_revenue_cpu * cpu + econ.unit_revenue_bw * bw);
            let cost: f64 = vnfs
                .iter()
                .map(|v| {
                    let unit = match required_region(SliceType::Urllc, v) {
                        Some(NodeRegion::Edge) => econ.unit_cost_cpu_edge,
                        _ => econ.unit_cost_cpu_core,
                    };
                    unit * v.cpu_demand as f64
                })
                .sum::<f64>()
                + econ.unit_cost_bw * bw;
            (revenue - cost) * t_o
        })
        .collect();
    profits.sort_by(f64::total_cmp);
    let median = profits[profits.len() / 2];
    forfeit * median / (urllc_priority * window_length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slicegen::{DemandConfig, Plane, VirtualLink, Vnf, VnfKind};
    use std::collections::BTreeMap;

    fn req(stype: SliceType, cpu: &[u32], bw: &[u32], t_o: f64) -> SliceRequest {
        let vnfs: Vec<Vnf> = cpu
            .iter()
            .enumerate()
            .map(|(id, &c)| Vnf {
                id,
                kind: VnfKind::Upf,
                cpu_demand: c,
                plane: Plane::UserPlane,
                backup_of: None,
            })
            .collect();
        let vlinks = bw
            .iter()
            .enumerate()
            .map(|(i, &b)| VirtualLink {
                endpoints: (0, i + 1),
                bw_demand: b,
                max_hops: 4,
            })
            .collect();
        SliceRequest {
            id: 0,
            stype,
            arrival_time: 0.0,
            operational_time: t_o,
            vnfs,
            vlinks,
        }
    }

    fn two_node() -> SubstrateNetwork {
        SubstrateNetwork::from_parts(
            &[
                (NodeRegion::Core, 10),
                (NodeRegion::Edge, 10),
                (NodeRegion::Core, 0),
            ],
            &[(0, 1, 10), (1, 2, 0)],
        )
        .unwrap()
    }

    #[test]
    fn revenue_examples() {
        let e = EconomicParams::default();
        assert_eq!(revenue_rate(&req(SliceType::Embb, &[], &[], 1.0), &e), 0.0);
        let r = req(SliceType::Embb, &[4, 6], &[20], 1.0);
        assert_eq!(revenue_rate(&r, &e), 20.0);
        let r = req(SliceType::Urllc, &[4, 6], &[20], 1.0);
        assert_eq!(revenue_rate(&r, &e), 30.0);
    }

    #[test]
    fn cost_examples() {
        let sn = two_node();
        let e = EconomicParams::default();
        assert_eq!(cost_rate(&Placement::empty(0), &sn, &e), 0.0);
        let core = Placement::from_aggregates(0, BTreeMap::from([(0, 5)]), BTreeMap::from([(0, 2), (1, 2)]));
        assert!((cost_rate(&core, &sn, &e) - 1.4).abs() < 1e-12);
        let edge = Placement::from_aggregates(0, BTreeMap::from([(1, 5)]), BTreeMap::from([(0, 2), (1, 2)]));
        assert!((cost_rate(&edge, &sn, &e) - 2.4).abs() < 1e-12);
    }

    #[test]
    fn reward_examples() {
        let sn = two_node();
        let r = req(SliceType::Embb, &[4], &[], 10.0);
        let p = Placement::from_aggregates(0, BTreeMap::from([(0, 4)]), BTreeMap::new());
        let e = EconomicParams::default();
        let b = slice_reward(&r, &p, &sn, 0.0, 30.0, &e);
        assert_eq!(b.reward, b.profit);
        let no_penalty = EconomicParams {
            penalty_scale: 0.0,
            ..e
        };
        let b = slice_reward(&r, &p, &sn, 3.0, 30.0, &no_penalty);
        assert_eq!(b.reward, b.profit);

        // profit 10, delta 1, priority 30, delay 0.5 => -5
        let unit = EconomicParams {
            unit_revenue_cpu: 1.0,
            unit_revenue_bw: 0.0,
            revenue_multiplier: PerType::new(1.0, 1.0, 1.0),
            unit_cost_cpu_core: 0.75,
            unit_cost_cpu_edge: 0.75,
            unit_cost_bw: 0.0,
            penalty_scale: 1.0,
        };
        let b = slice_reward(&r, &p, &sn, 0.5, 30.0, &unit);
        assert_eq!(b.profit, 10.0);
        assert_eq!(b.reward, -5.0);
    }

    #[test]
    fn max_profit_examples() {
        let sn = two_node();
        // blended cpu cost (10*0.2 + 10*0.4)/20 = 0.3
        let e = EconomicParams {
            unit_revenue_cpu: 0.8,
            unit_revenue_bw: 0.35,
            revenue_multiplier: PerType::new(1.0, 1.0, 0.5),
            unit_cost_cpu_core: 0.2,
            unit_cost_cpu_edge: 0.4,
            unit_cost_bw: 0.1,
            penalty_scale: 0.0,
        };
        assert!((max_profit(&sn, 4.0, &e) - 50.0).abs() < 1e-12);
        assert!((max_profit(&sn, 8.0, &e) - 100.0).abs() < 1e-12);

        let losing = EconomicParams {
            unit_revenue_cpu: 0.1,
            unit_revenue_bw: 0.01,
            ..e
        };
        assert_eq!(max_profit(&sn, 4.0, &losing), 0.0);
        assert_eq!(
            window_reward(&[], &sn, 4.0, &losing),
            Err(RewardError::DegenerateEconomics(0.0))
        );
        assert!(!losing.validate().is_empty());
    }

    #[test]
    fn window_reward_examples() {
        let sn = two_node();
        let e = EconomicParams {
            unit_revenue_cpu: 0.8,
            unit_revenue_bw: 0.35,
            revenue_multiplier: PerType::new(1.0, 1.0, 0.5),
            unit_cost_cpu_core: 0.2,
            unit_cost_cpu_edge: 0.4,
            unit_cost_bw: 0.1,
            penalty_scale: 0.0,
        };
        assert_eq!(window_reward(&[], &sn, 4.0, &e), Ok(0.0));
        let five = RewardBreakdown {
            reward: 5.0,
            ..Default::default()
        };
        let r = window_reward(&[five], &sn, 4.0, &e).unwrap();
        assert!((r - 0.1).abs() < 1e-12);
        let rejected = [RewardBreakdown::zero(); 3];
        assert_eq!(window_reward(&rejected, &sn, 4.0, &e), Ok(0.0));
    }

    #[test]
    fn default_penalty_scale_matches_calibration() {
        let delta = calibrate_penalty_scale(
            &DemandConfig::default(),
            &EconomicParams::default(),
            30.0,
            1.0,
            0.25,
            20_001,
            0,
        );
        assert!(
            (delta - DEFAULT_PENALTY_SCALE).abs() / delta < 0.05,
            "calibrated delta {delta}"
        );
    }

    #[test]
    fn default_economics_validate() {
        assert!(EconomicParams::default().validate().is_empty());
    }
}
