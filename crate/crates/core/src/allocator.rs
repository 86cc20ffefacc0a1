//! Resource allocation: greedy two-phase embedding of a slice request onto the
//! substrate, plus an independent placement checker.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::slicegen::{required_region, SliceRequest};
use crate::substrate::{LinkId, NodeId, SubstrateNetwork, Units};

/// A request's VNF-to-node and virtual-link-to-path mapping, with demands
/// aggregated per substrate node and link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub nslr_id: u64,
    /// Node hosting each VNF, indexed by VNF id.
    pub vnf_map: Vec<NodeId>,
    /// Substrate path of each virtual link, indexed by virtual-link position.
    pub link_map: Vec<Vec<LinkId>>,
    pub cpu_per_node: BTreeMap<NodeId, Units>,
    pub bw_per_link: BTreeMap<LinkId, Units>,
}

impl Placement {
    pub fn empty(nslr_id: u64) -> Self {
        Self::from_aggregates(nslr_id, BTreeMap::new(), BTreeMap::new())
    }

    /// Builds a placement and derives its per-node and per-link aggregates.
    pub fn new(req: &SliceRequest, vnf_map: Vec<NodeId>, link_map: Vec<Vec<LinkId>>) -> Self {
        let (cpu_per_node, bw_per_link) = aggregate(req, &vnf_map, &link_map);
        Self {
            nslr_id: req.id,
            vnf_map,
            link_map,
            cpu_per_node,
            bw_per_link,
        }
    }

    /// A bare reservation with no VNF or path detail.
    pub fn from_aggregates(
        nslr_id: u64,
        cpu_per_node: BTreeMap<NodeId, Units>,
        bw_per_link: BTreeMap<LinkId, Units>,
    ) -> Self {
        Self {
            nslr_id,
            vnf_map: Vec::new(),
            link_map: Vec::new(),
            cpu_per_node,
            bw_per_link,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cpu_per_node.values().all(|&c| c == 0) && self.bw_per_link.values().all(|&b| b == 0)
    }

    pub fn total_cpu(&self) -> u64 {
        self.cpu_per_node.values().map(|&c| c as u64).sum()
    }

    pub fn total_bw(&self) -> u64 {
        self.bw_per_link.values().map(|&b| b as u64).sum()
    }
}

fn aggregate(
    req: &SliceRequest,
    vnf_map: &[NodeId],
    link_map: &[Vec<LinkId>],
) -> (BTreeMap<NodeId, Units>, BTreeMap<LinkId, Units>) {
    let mut cpu = BTreeMap::new();
    for (vnf, &node) in req.vnfs.iter().zip(vnf_map) {
        *cpu.entry(node).or_insert(0) += vnf.cpu_demand;
    }
    let mut bw = BTreeMap::new();
    for (vl, path) in req.vlinks.iter().zip(link_map) {
        for &l in path {
            *bw.entry(l).or_insert(0) += vl.bw_demand;
        }
    }
    (cpu, bw)
}

/// Why a request could not be embedded. Indices refer to the request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// No node in the right region has enough residual CPU for this VNF.
    NodeMapping { vnf: usize },
    /// Only nodes already holding the protected primary (or its backup) could fit.
    AntiAffinity { vnf: usize },
    /// No path within the hop bound has enough residual bandwidth.
    LinkMapping { vlink: usize },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::NodeMapping { vnf } => write!(f, "node-mapping(vnf {vnf})"),
            Rejection::AntiAffinity { vnf } => write!(f, "anti-affinity(vnf {vnf})"),
            Rejection::LinkMapping { vlink } => write!(f, "link-mapping(vlink {vlink})"),
        }
    }
}

/// Backup pairs are mutually exclusive on a node.
fn conflicts(req: &SliceRequest, a: usize, b: usize) -> bool {
    req.vnfs[a].backup_of == Some(b) || req.vnfs[b].backup_of == Some(a)
}

/// Greedy embedding, dry run only: the substrate is not touched.
///
/// VNFs go in descending CPU order (ties by id) to the eligible node with the
/// highest embedding potential on residual resources (ties by node id). Each
/// virtual link then takes the shortest feasible path between its endpoints'
/// hosts. The first element that cannot be placed rejects the request.
pub fn map_request(sn: &SubstrateNetwork, req: &SliceRequest) -> Result<Placement, Rejection> {
    let n_nodes = sn.nodes().len();
    let mut cpu_used = vec![0 as Units; n_nodes];
    let mut vnf_map: Vec<Option<NodeId>> = vec![None; req.vnfs.len()];

    let mut order: Vec<usize> = (0..req.vnfs.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(req.vnfs[i].cpu_demand), i));

    for &i in &order {
        let vnf = &req.vnfs[i];
        let region = required_region(req.stype, vnf);
        let mut best: Option<(f64, NodeId)> = None;
        let mut blocked_by_affinity = false;
        for node in sn.nodes() {
            if region.is_some_and(|r| r != node.region) {
                continue;
            }
            let residual = node.cpu_available() - cpu_used[node.id];
            if residual < vnf.cpu_demand {
                continue;
            }
            let clash = vnf_map
                .iter()
                .enumerate()
                .any(|(j, &m)| m == Some(node.id) && conflicts(req, i, j));
            if clash {
                blocked_by_affinity = true;
                continue;
            }
            let ep = sn.embedding_potential_with(node.id, residual, |l| sn.link(l).bw_available());
            if best.is_none_or(|(b, _)| ep > b) {
                best = Some((ep, node.id));
            }
        }
        match best {
            Some((_, node)) => {
                cpu_used[node] += vnf.cpu_demand;
                vnf_map[i] = Some(node);
            }
            None if blocked_by_affinity => return Err(Rejection::AntiAffinity { vnf: i }),
            None => return Err(Rejection::NodeMapping { vnf: i }),
        }
    }
    let vnf_map: Vec<NodeId> = vnf_map.into_iter().map(|m| m.expect("all mapped")).collect();

    let mut bw_used = vec![0 as Units; sn.links().len()];
    let mut link_map = Vec::with_capacity(req.vlinks.len());
    for (k, vl) in req.vlinks.iter().enumerate() {
        let (a, b) = (vnf_map[vl.endpoints.0], vnf_map[vl.endpoints.1]);
        let path = sn
            .shortest_path_where(a, b, vl.max_hops, |l| {
                sn.link(l).bw_available() - bw_used[l] >= vl.bw_demand
            })
            .ok_or(Rejection::LinkMapping { vlink: k })?;
        for &l in &path {
            bw_used[l] += vl.bw_demand;
        }
        link_map.push(path);
    }
    Ok(Placement::new(req, vnf_map, link_map))
}

/// True iff `placement` is a complete, constraint-respecting embedding of
/// `req` that fits in the substrate's current availability.
pub fn verify_placement(sn: &SubstrateNetwork, req: &SliceRequest, placement: &Placement) -> bool {
    if placement.nslr_id != req.id
        || placement.vnf_map.len() != req.vnfs.len()
        || placement.link_map.len() != req.vlinks.len()
    {
        return false;
    }
    let n_nodes = sn.nodes().len();
    for (vnf, &node) in req.vnfs.iter().zip(&placement.vnf_map) {
        if node >= n_nodes {
            return false;
        }
        if required_region(req.stype, vnf).is_some_and(|r| r != sn.node(node).region) {
            return false;
        }
        if let Some(p) = vnf.backup_of {
            if placement.vnf_map.get(p) == Some(&node) {
                return false;
            }
        }
    }
    for (vl, path) in req.vlinks.iter().zip(&placement.link_map) {
        let (src, dst) = (
            placement.vnf_map[vl.endpoints.0],
            placement.vnf_map[vl.endpoints.1],
        );
        if path.len() > vl.max_hops {
            return false;
        }
        let mut at = src;
        let mut visited = BTreeSet::from([src]);
        for &l in path {
            if l >= sn.links().len() {
                return false;
            }
            let (u, v) = sn.link(l).endpoints;
            at = match at {
                x if x == u => v,
                x if x == v => u,
                _ => return false,
            };
            if !visited.insert(at) {
                return false;
            }
        }
        if at != dst {
            return false;
        }
    }
    let (cpu, bw) = aggregate(req, &placement.vnf_map, &placement.link_map);
    if cpu != placement.cpu_per_node || bw != placement.bw_per_link {
        return false;
    }
    cpu.iter().all(|(&n, &c)| sn.node(n).cpu_available() >= c)
        && bw.iter().all(|(&l, &b)| sn.link(l).bw_available() >= b)
}
