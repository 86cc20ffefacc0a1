//! Network slice requests: per-type VNF graph templates and Poisson arrival
//! traces, with CSV import/export so competing schemes replay identical traffic.

use std::fmt;
use std::io::{Read, Write};
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::substrate::{NodeRegion, Units};

#[derive(Debug, Error)]
pub enum SliceGenError {
    #[error("invalid traffic parameter: {0}")]
    InvalidParameter(String),
    #[error("trace csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace row {row}: {detail}")]
    BadRow { row: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SliceType {
    #[serde(rename = "eMBB")]
    Embb,
    #[serde(rename = "URLLC")]
    Urllc,
    #[serde(rename = "mMTC")]
    Mmtc,
}

impl SliceType {
    pub const ALL: [SliceType; 3] = [SliceType::Embb, SliceType::Urllc, SliceType::Mmtc];

    pub fn as_str(self) -> &'static str {
        match self {
            SliceType::Embb => "eMBB",
            SliceType::Urllc => "URLLC",
            SliceType::Mmtc => "mMTC",
        }
    }

    /// Lower-case tag used in CSV column names.
    pub fn tag(self) -> &'static str {
        match self {
            SliceType::Embb => "embb",
            SliceType::Urllc => "urllc",
            SliceType::Mmtc => "mmtc",
        }
    }
}

impl fmt::Display for SliceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SliceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eMBB" | "embb" => Ok(SliceType::Embb),
            "URLLC" | "urllc" => Ok(SliceType::Urllc),
            "mMTC" | "mmtc" => Ok(SliceType::Mmtc),
            other => Err(format!("unknown slice type {other:?}")),
        }
    }
}

/// One value per slice type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerType<T> {
    pub embb: T,
    pub urllc: T,
    pub mmtc: T,
}

impl<T> PerType<T> {
    pub fn new(embb: T, urllc: T, mmtc: T) -> Self {
        Self { embb, urllc, mmtc }
    }

    pub fn from_fn(mut f: impl FnMut(SliceType) -> T) -> Self {
        Self {
            embb: f(SliceType::Embb),
            urllc: f(SliceType::Urllc),
            mmtc: f(SliceType::Mmtc),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (SliceType, &T)> {
        SliceType::ALL.into_iter().map(move |t| (t, &self[t]))
    }
}

impl<T> Index<SliceType> for PerType<T> {
    type Output = T;

    fn index(&self, t: SliceType) -> &T {
        match t {
            SliceType::Embb => &self.embb,
            SliceType::Urllc => &self.urllc,
            SliceType::Mmtc => &self.mmtc,
        }
    }
}

impl<T> IndexMut<SliceType> for PerType<T> {
    fn index_mut(&mut self, t: SliceType) -> &mut T {
        match t {
            SliceType::Embb => &mut self.embb,
            SliceType::Urllc => &mut self.urllc,
            SliceType::Mmtc => &mut self.mmtc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    ControlPlane,
    UserPlane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VnfKind {
    Amf,
    Smf,
    Upf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vnf {
    pub id: usize,
    pub kind: VnfKind,
    pub cpu_demand: Units,
    pub plane: Plane,
    /// Index of the VNF this one backs up; backups never share its node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backup_of: Option<usize>,
}

impl Vnf {
    pub fn is_backup(&self) -> bool {
        self.backup_of.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualLink {
    pub endpoints: (usize, usize),
    pub bw_demand: Units,
    pub max_hops: usize,
}

/// Region a VNF must land in, if constrained.
pub fn required_region(stype: SliceType, vnf: &Vnf) -> Option<NodeRegion> {
    match (vnf.plane, stype) {
        (Plane::ControlPlane, _) => Some(NodeRegion::Core),
        (Plane::UserPlane, SliceType::Urllc) => Some(NodeRegion::Edge),
        (Plane::UserPlane, _) => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRequest {
    pub id: u64,
    pub stype: SliceType,
    pub arrival_time: f64,
    /// Operational time T_o.
    pub operational_time: f64,
    pub vnfs: Vec<Vnf>,
    pub vlinks: Vec<VirtualLink>,
}

impl SliceRequest {
    pub fn total_cpu(&self) -> u64 {
        self.vnfs.iter().map(|v| v.cpu_demand as u64).sum()
    }

    pub fn total_bw(&self) -> u64 {
        self.vlinks.iter().map(|l| l.bw_demand as u64).sum()
    }

    /// Checks the structural invariants of a request.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.operational_time > 0.0 && self.operational_time.is_finite()) {
            return Err(format!(
                "operational time {} must be positive",
                self.operational_time
            ));
        }
        if !(self.arrival_time >= 0.0 && self.arrival_time.is_finite()) {
            return Err(format!("arrival time {} must be non-negative", self.arrival_time));
        }
        let n = self.vnfs.len();
        for (i, v) in self.vnfs.iter().enumerate() {
            if v.id != i {
                return Err(format!("vnf at position {i} has id {}", v.id));
            }
            if v.cpu_demand == 0 {
                return Err(format!("vnf {i} has zero cpu demand"));
            }
            if let Some(p) = v.backup_of {
                if p >= n || p == i {
                    return Err(format!("vnf {i} backs up invalid vnf {p}"));
                }
            }
        }
        for (i, l) in self.vlinks.iter().enumerate() {
            let (a, b) = l.endpoints;
            if a >= n || b >= n || a == b {
                return Err(format!("virtual link {i} has invalid endpoints ({a}, {b})"));
            }
            if l.bw_demand == 0 {
                return Err(format!("virtual link {i} has zero bandwidth demand"));
            }
        }
        if n > 0 {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for l in &self.vlinks {
                    let (a, b) = l.endpoints;
                    let next = if a == u {
                        b
                    } else if b == u {
                        a
                    } else {
                        continue;
                    };
                    if !seen[next] {
                        seen[next] = true;
                        stack.push(next);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err("slice graph is not connected".into());
            }
        }
        Ok(())
    }
}

/// Demand ranges for one slice type. Integer ranges are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeDemand {
    pub cpu: [Units; 2],
    pub bw: [Units; 2],
    pub operational_time: [f64; 2],
    pub max_hops: usize,
    /// Hop bound for virtual links touching a user-plane VNF.
    pub user_plane_max_hops: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemandConfig {
    pub embb: TypeDemand,
    pub urllc: TypeDemand,
    pub mmtc: TypeDemand,
}

impl DemandConfig {
    pub fn get(&self, t: SliceType) -> &TypeDemand {
        match t {
            SliceType::Embb => &self.embb,
            SliceType::Urllc => &self.urllc,
            SliceType::Mmtc => &self.mmtc,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in SliceType::ALL {
            let d = self.get(t);
            let tag = t.tag();
            if d.cpu[0] == 0 || d.cpu[0] > d.cpu[1] {
                out.push(format!("{tag}.cpu: range must be positive and ordered"));
            }
            if d.bw[0] == 0 || d.bw[0] > d.bw[1] {
                out.push(format!("{tag}.bw: range must be positive and ordered"));
            }
            let [lo, hi] = d.operational_time;
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                out.push(format!(
                    "{tag}.operational_time: range must be positive and ordered"
                ));
            }
            if d.max_hops == 0 || d.user_plane_max_hops == 0 {
                out.push(format!("{tag}: hop bounds must be at least 1"));
            }
        }
        out
    }
}

impl Default for DemandConfig {
    fn default() -> Self {
        Self {
            embb: TypeDemand {
                cpu: [4, 8],
                bw: [8, 16],
                operational_time: [20.0, 60.0],
                max_hops: 4,
                user_plane_max_hops: 4,
            },
            urllc: TypeDemand {
                cpu: [2, 4],
                bw: [2, 6],
                operational_time: [10.0, 40.0],
                max_hops: 4,
                user_plane_max_hops: 2,
            },
            mmtc: TypeDemand {
                cpu: [2, 5],
                bw: [1, 4],
                operational_time: [30.0, 80.0],
                max_hops: 4,
                user_plane_max_hops: 4,
            },
        }
    }
}

/// Arrival shares per slice type; must sum to one.
pub type TrafficMix = PerType<f64>;

impl TrafficMix {
    pub fn default_mix() -> Self {
        PerType::new(0.4, 0.3, 0.3)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.iter().any(|(_, &p)| !(p >= 0.0 && p.is_finite())) {
            return Err("mix probabilities must be finite and non-negative".into());
        }
        let sum = self.embb + self.urllc + self.mmtc;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("mix probabilities sum to {sum}, expected 1"));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut impl Rng) -> SliceType {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for t in SliceType::ALL {
            acc += self[t];
            if u < acc {
                return t;
            }
        }
        // Rounding left a sliver above the cumulative sum.
        *SliceType::ALL.iter().rev().find(|&&t| self[t] > 0.0).unwrap()
    }
}

/// Template VNF graph for `stype`, demands drawn from `demand`.
///
/// eMBB: AMF, SMF (core) and one UPF. URLLC: AMF, SMF, an edge UPF and its
/// edge backup. mMTC: two AMFs, SMF and one UPF. Every control function hangs
/// off the SMF; every UPF connects to the SMF.
pub fn build_slice_graph(
    stype: SliceType,
    demand: &DemandConfig,
    rng: &mut impl Rng,
) -> (Vec<Vnf>, Vec<VirtualLink>) {
    let d = demand.get(stype);
    let kinds: &[(VnfKind, Option<usize>)] = match stype {
        SliceType::Embb => &[(VnfKind::Amf, None), (VnfKind::Smf, None), (VnfKind::Upf, None)],
        SliceType::Urllc => &[
            (VnfKind::Amf, None),
            (VnfKind::Smf, None),
            (VnfKind::Upf, None),
            (VnfKind::Upf, Some(2)),
        ],
        SliceType::Mmtc => &[
            (VnfKind::Amf, None),
            (VnfKind::Amf, None),
            (VnfKind::Smf, None),
            (VnfKind::Upf, None),
        ],
    };
    let vnfs: Vec<Vnf> = kinds
        .iter()
        .enumerate()
        .map(|(id, &(kind, backup_of))| Vnf {
            id,
            kind,
            cpu_demand: rng.random_range(d.cpu[0]..=d.cpu[1]),
            plane: if kind == VnfKind::Upf {
                Plane::UserPlane
            } else {
                Plane::ControlPlane
            },
            backup_of,
        })
        .collect();
    let smf = vnfs.iter().position(|v| v.kind == VnfKind::Smf).unwrap();
    let vlinks = vnfs
        .iter()
        .filter(|v| v.id != smf)
        .map(|v| VirtualLink {
            endpoints: (v.id.min(smf), v.id.max(smf)),
            bw_demand: rng.random_range(d.bw[0]..=d.bw[1]),
            max_hops: if v.plane == Plane::UserPlane {
                d.user_plane_max_hops
            } else {
                d.max_hops
            },
        })
        .collect();
    (vnfs, vlinks)
}

fn sample_operational_time(d: &TypeDemand, rng: &mut impl Rng) -> f64 {
    let [lo, hi] = d.operational_time;
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Poisson arrivals on `[0, horizon)` with i.i.d. types drawn from `mix`.
pub fn generate_trace(
    horizon: f64,
    rate: f64,
    mix: &TrafficMix,
    demand: &DemandConfig,
    seed: u64,
) -> Result<Vec<SliceRequest>, SliceGenError> {
    mix.validate().map_err(SliceGenError::InvalidParameter)?;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(SliceGenError::InvalidParameter(format!(
            "arrival rate {rate} must be positive"
        )));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(SliceGenError::InvalidParameter(format!(
            "horizon {horizon} must be non-negative"
        )));
    }
    let gaps = Exp::new(rate).map_err(|e| SliceGenError::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Vec::new();
    let mut t = 0.0_f64;
    loop {
        let mut next = t + gaps.sample(&mut rng);
        while next <= t && !trace.is_empty() {
            next = t + gaps.sample(&mut rng);
        }
        t = next;
        if t >= horizon {
            break;
        }
        let stype = mix.sample(&mut rng);
        let (vnfs, vlinks) = build_slice_graph(stype, demand, &mut rng);
        let operational_time = sample_operational_time(demand.get(stype), &mut rng);
        trace.push(SliceRequest {
            id: trace.len() as u64,
            stype,
            arrival_time: t,
            operational_time,
            vnfs,
            vlinks,
        });
    }
    Ok(trace)
}

#[derive(Serialize, Deserialize)]
struct GraphSpec {
    vnfs: Vec<Vnf>,
    vlinks: Vec<VirtualLink>,
}

const TRACE_HEADER: [&str; 5] = ["id", "stype", "arrival_time", "T_o", "graph_spec_json_blob"];

/// Writes `id,stype,arrival_time,T_o,graph_spec_json_blob` rows.
pub fn write_trace_csv<W: Write>(trace: &[SliceRequest], out: W) -> Result<(), SliceGenError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in trace {
        let blob = serde_json::to_string(&GraphSpec {
            vnfs: r.vnfs.clone(),
            vlinks: r.vlinks.clone(),
        })
        .expect("graph spec serializes");
        w.write_record([
            r.id.to_string(),
            r.stype.to_string(),
            r.arrival_time.to_string(),
            r.operational_time.to_string(),
            blob,
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<SliceRequest>, SliceGenError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(SliceGenError::BadRow {
            row: 0,
            detail: format!("unexpected header {headers:?}"),
        });
    }
    let mut out: Vec<SliceRequest> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let bad = |detail: String| SliceGenError::BadRow { row, detail };
        let id = rec[0].parse::<u64>().map_err(|e| bad(format!("id: {e}")))?;
        let stype = rec[1].parse::<SliceType>().map_err(bad)?;
        let arrival_time = rec[2]
            .parse::<f64>()
            .map_err(|e| bad(format!("arrival_time: {e}")))?;
        let operational_time = rec[3].parse::<f64>().map_err(|e| bad(format!("T_o: {e}")))?;
        let spec: GraphSpec = serde_json::from_str(&rec[4]).map_err(|e| bad(format!("graph spec: {e}")))?;
        let req = SliceRequest {
            id,
            stype,
            arrival_time,
            operational_time,
            vnfs: spec.vnfs,
            vlinks: spec.vlinks,
        };
        req.validate().map_err(bad)?;
        if let Some(prev) = out.last() {
            if req.arrival_time <= prev.arrival_time {
                return Err(bad("arrival times must be strictly increasing".into()));
            }
        }
        out.push(req);
    }
    Ok(out)
}
