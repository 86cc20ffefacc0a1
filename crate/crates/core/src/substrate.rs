//! Substrate network model: core/edge nodes with CPU, undirected links with
//! bandwidth, capacity accounting, Barabási–Albert generation, node ranking
//! and hop-bounded feasible path search.
//!
//! Resources are integral units so that allocate/release round-trips are exact.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocator::Placement;

pub type NodeId = usize;
pub type LinkId = usize;
/// CPU or bandwidth units.
pub type Units = u32;

#[derive(Debug, Error, PartialEq)]
pub enum SubstrateError {
    #[error("invalid substrate parameter: {0}")]
    InvalidParameter(String),
    #[error("infeasible placement for request {nslr_id}: {detail}")]
    InfeasiblePlacement { nslr_id: u64, detail: String },
    #[error("placement for request {0} released twice or never allocated")]
    DoubleRelease(u64),
    #[error("placement for request {0} is already allocated")]
    AlreadyAllocated(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeRegion {
    Core,
    Edge,
}

impl fmt::Display for NodeRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRegion::Core => f.write_str("core"),
            NodeRegion::Edge => f.write_str("edge"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstrateNode {
    pub id: NodeId,
    pub region: NodeRegion,
    pub cpu_capacity: Units,
    cpu_available: Units,
}

impl SubstrateNode {
    pub fn cpu_available(&self) -> Units {
        self.cpu_available
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstrateLink {
    pub id: LinkId,
    /// Endpoints, stored with the smaller node id first.
    pub endpoints: (NodeId, NodeId),
    pub bw_capacity: Units,
    bw_available: Units,
}

impl SubstrateLink {
    pub fn bw_available(&self) -> Units {
        self.bw_available
    }

    /// The endpoint opposite `node`. `node` must be one of the endpoints.
    pub fn other(&self, node: NodeId) -> NodeId {
        if self.endpoints.0 == node {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

/// CPU and bandwidth handed out by the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapacityProfile {
    pub core_cpu: Units,
    pub edge_cpu: Units,
    pub link_bw: Units,
}

impl Default for CapacityProfile {
    fn default() -> Self {
        Self {
            core_cpu: 100,
            edge_cpu: 50,
            link_bw: 100,
        }
    }
}

/// Availability vectors in node-id / link-id order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Availability {
    pub cpu: Vec<Units>,
    pub bw: Vec<Units>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Reservation {
    cpu: BTreeMap<NodeId, Units>,
    bw: BTreeMap<LinkId, Units>,
}

#[derive(Debug, Clone)]
pub struct SubstrateNetwork {
    nodes: Vec<SubstrateNode>,
    links: Vec<SubstrateLink>,
    adjacency: Vec<Vec<LinkId>>,
    reservations: BTreeMap<u64, Reservation>,
}

impl SubstrateNetwork {
    /// Builds a network from `(region, cpu)` node specs and `(u, v, bw)` link
    /// specs. The graph must be connected, loop-free and without duplicate links.
    pub fn from_parts(
        nodes: &[(NodeRegion, Units)],
        links: &[(NodeId, NodeId, Units)],
    ) -> Result<Self, SubstrateError> {
        if nodes.is_empty() {
            return Err(SubstrateError::InvalidParameter(
                "substrate needs at least one node".into(),
            ));
        }
        let nodes: Vec<SubstrateNode> = nodes
            .iter()
            .enumerate()
            .map(|(id, &(region, cpu))| SubstrateNode {
                id,
                region,
                cpu_capacity: cpu,
                cpu_available: cpu,
            })
            .collect();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut seen = std::collections::BTreeSet::new();
        let mut out_links = Vec::with_capacity(links.len());
        for (id, &(u, v, bw)) in links.iter().enumerate() {
            if u >= nodes.len() || v >= nodes.len() {
                return Err(SubstrateError::InvalidParameter(format!(
                    "link {id} references unknown node"
                )));
            }
            if u == v {
                return Err(SubstrateError::InvalidParameter(format!(
                    "link {id} is a self-loop on node {u}"
                )));
            }
            let endpoints = (u.min(v), u.max(v));
            if !seen.insert(endpoints) {
                return Err(SubstrateError::InvalidParameter(format!(
                    "duplicate link between {} and {}",
                    endpoints.0, endpoints.1
                )));
            }
            adjacency[u].push(id);
            adjacency[v].push(id);
            out_links.push(SubstrateLink {
                id,
                endpoints,
                bw_capacity: bw,
                bw_available: bw,
            });
        }
        let sn = Self {
            nodes,
            links: out_links,
            adjacency,
            reservations: BTreeMap::new(),
        };
        if !sn.is_connected() {
            return Err(SubstrateError::InvalidParameter(
                "substrate graph is not connected".into(),
            ));
        }
        Ok(sn)
    }

    /// Barabási–Albert substrate. Starts from a complete graph on `attach_m`
    /// nodes; every later node attaches to `attach_m` distinct existing nodes
    /// with probability proportional to degree. The `edge_fraction` lowest-degree
    /// nodes become Edge nodes (degree ties go to the younger node).
    pub fn generate(
        n_nodes: usize,
        attach_m: usize,
        edge_fraction: f64,
        profile: &CapacityProfile,
        seed: u64,
    ) -> Result<Self, SubstrateError> {
        if attach_m < 1 {
            return Err(SubstrateError::InvalidParameter(
                "attach_m must be at least 1".into(),
            ));
        }
        if n_nodes < attach_m + 1 {
            return Err(SubstrateError::InvalidParameter(format!(
                "n_nodes ({n_nodes}) must be at least attach_m + 1 ({})",
                attach_m + 1
            )));
        }
        if !(0.0..=1.0).contains(&edge_fraction) {
            return Err(SubstrateError::InvalidParameter(format!(
                "edge_fraction {edge_fraction} outside [0, 1]"
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
        // One entry per unit of degree.
        let mut pool: Vec<NodeId> = Vec::new();
        for u in 0..attach_m {
            for v in (u + 1)..attach_m {
                edges.push((u, v));
                pool.push(u);
                pool.push(v);
            }
        }
        for new in attach_m..n_nodes {
            let mut targets: Vec<NodeId> = Vec::with_capacity(attach_m);
            while targets.len() < attach_m {
                let t = if pool.is_empty() {
                    rng.random_range(0..new)
                } else {
                    pool[rng.random_range(0..pool.len())]
                };
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
            targets.sort_unstable();
            for t in targets {
                edges.push((t, new));
                pool.push(t);
                pool.push(new);
            }
        }

        let mut degree = vec![0usize; n_nodes];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let n_edge = (edge_fraction * n_nodes as f64).round() as usize;
        let mut by_degree: Vec<NodeId> = (0..n_nodes).collect();
        by_degree.sort_by_key(|&n| (degree[n], std::cmp::Reverse(n)));
        let mut region = vec![NodeRegion::Core; n_nodes];
        for &n in by_degree.iter().take(n_edge) {
            region[n] = NodeRegion::Edge;
        }

        let node_specs: Vec<(NodeRegion, Units)> = region
            .iter()
            .map(|&r| match r {
                NodeRegion::Core => (r, profile.core_cpu),
                NodeRegion::Edge => (r, profile.edge_cpu),
            })
            .collect();
        let link_specs: Vec<(NodeId, NodeId, Units)> =
            edges.iter().map(|&(u, v)| (u, v, profile.link_bw)).collect();
        Self::from_parts(&node_specs, &link_specs)
    }

    pub fn nodes(&self) -> &[SubstrateNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[SubstrateLink] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> &SubstrateNode {
        &self.nodes[id]
    }

    pub fn link(&self, id: LinkId) -> &SubstrateLink {
        &self.links[id]
    }

    pub fn adjacent_links(&self, node: NodeId) -> &[LinkId] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    /// Link joining `u` and `v`, if any.
    pub fn link_between(&self, u: NodeId, v: NodeId) -> Option<LinkId> {
        self.adjacency
            .get(u)?
            .iter()
            .copied()
            .find(|&l| self.links[l].other(u) == v)
    }

    pub fn total_cpu_capacity(&self) -> u64 {
        self.nodes.iter().map(|n| n.cpu_capacity as u64).sum()
    }

    pub fn total_bw_capacity(&self) -> u64 {
        self.links.iter().map(|l| l.bw_capacity as u64).sum()
    }

    pub fn region_cpu_capacity(&self, region: NodeRegion) -> u64 {
        self.nodes
            .iter()
            .filter(|n| n.region == region)
            .map(|n| n.cpu_capacity as u64)
            .sum()
    }

    /// CPU currently handed out (capacity minus availability, summed).
    pub fn allocated_cpu(&self) -> u64 {
        self.nodes
            .iter()
            .map(|n| (n.cpu_capacity - n.cpu_available) as u64)
            .sum()
    }

    pub fn allocated_bw(&self) -> u64 {
        self.links
            .iter()
            .map(|l| (l.bw_capacity - l.bw_available) as u64)
            .sum()
    }

    pub fn availability(&self) -> Availability {
        Availability {
            cpu: self.nodes.iter().map(|n| n.cpu_available).collect(),
            bw: self.links.iter().map(|l| l.bw_available).collect(),
        }
    }

    pub fn is_fully_available(&self) -> bool {
        self.nodes.iter().all(|n| n.cpu_available == n.cpu_capacity)
            && self.links.iter().all(|l| l.bw_available == l.bw_capacity)
    }

    /// Number of placements currently holding resources.
    pub fn active_reservations(&self) -> usize {
        self.reservations.len()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &l in &self.adjacency[u] {
                let v = self.links[l].other(u);
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.nodes.len()
    }

    /// Residual CPU times the residual bandwidth of all adjacent links.
    pub fn embedding_potential(&self, node: NodeId) -> f64 {
        self.embedding_potential_with(node, self.nodes[node].cpu_available, |l| {
            self.links[l].bw_available
        })
    }

    pub(crate) fn embedding_potential_with(
        &self,
        node: NodeId,
        cpu_available: Units,
        bw_available: impl Fn(LinkId) -> Units,
    ) -> f64 {
        let bw: u64 = self.adjacency[node].iter().map(|&l| bw_available(l) as u64).sum();
        cpu_available as f64 * bw as f64
    }

    /// Minimum-hop path from `src` to `dst` over links with at least
    /// `bw_demand` bandwidth available, at most `max_hops` links long. Among
    /// equally short paths the lexicographically smallest node sequence wins.
    pub fn shortest_feasible_path(
        &self,
        src: NodeId,
        dst: NodeId,
        bw_demand: Units,
        max_hops: usize,
    ) -> Option<Vec<LinkId>> {
        self.shortest_path_where(src, dst, max_hops, |l| self.links[l].bw_available >= bw_demand)
    }

    pub(crate) fn shortest_path_where(
        &self,
        src: NodeId,
        dst: NodeId,
        max_hops: usize,
        usable: impl Fn(LinkId) -> bool,
    ) -> Option<Vec<LinkId>> {
        if src == dst {
            return Some(Vec::new());
        }
        // Hop distance to dst over usable links.
        let mut dist = vec![usize::MAX; self.nodes.len()];
        dist[dst] = 0;
        let mut queue = VecDeque::from([dst]);
        while let Some(u) = queue.pop_front() {
            if u == src || dist[u] >= max_hops {
                continue;
            }
            for &l in &self.adjacency[u] {
                if !usable(l) {
                    continue;
                }
                let v = self.links[l].other(u);
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if dist[src] > max_hops {
            return None;
        }
        let mut path = Vec::with_capacity(dist[src]);
        let mut at = src;
        while at != dst {
            let (link, next) = self.adjacency[at]
                .iter()
                .filter(|&&l| usable(l))
                .map(|&l| (l, self.links[l].other(at)))
                .filter(|&(_, v)| dist[v] != usize::MAX && dist[v] + 1 == dist[at])
                .min_by_key(|&(_, v)| v)?;
            path.push(link);
            at = next;
        }
        Some(path)
    }

    fn check_feasible(&self, placement: &Placement) -> Result<(), SubstrateError> {
        let infeasible = |detail: String| SubstrateError::InfeasiblePlacement {
            nslr_id: placement.nslr_id,
            detail,
        };
        for (&n, &cpu) in &placement.cpu_per_node {
            let node = self
                .nodes
                .get(n)
                .ok_or_else(|| infeasible(format!("unknown node {n}")))?;
            if node.cpu_available < cpu {
                return Err(infeasible(format!(
                    "node {n} has {} CPU available, {cpu} demanded",
                    node.cpu_available
                )));
            }
        }
        for (&l, &bw) in &placement.bw_per_link {
            let link = self
                .links
                .get(l)
                .ok_or_else(|| infeasible(format!("unknown link {l}")))?;
            if link.bw_available < bw {
                return Err(infeasible(format!(
                    "link {l} has {} bandwidth available, {bw} demanded",
                    link.bw_available
                )));
            }
        }
        Ok(())
    }

    /// Reserves the aggregated demands of `placement`. All-or-nothing.
    pub fn allocate(&mut self, placement: &Placement) -> Result<(), SubstrateError> {
        if placement.is_empty() {
            return Ok(());
        }
        if self.reservations.contains_key(&placement.nslr_id) {
            return Err(SubstrateError::AlreadyAllocated(placement.nslr_id));
        }
        self.check_feasible(placement)?;
        for (&n, &cpu) in &placement.cpu_per_node {
            self.nodes[n].cpu_available -= cpu;
        }
        for (&l, &bw) in &placement.bw_per_link {
            self.links[l].bw_available -= bw;
        }
        self.reservations.insert(
            placement.nslr_id,
            Reservation {
                cpu: placement.cpu_per_node.clone(),
                bw: placement.bw_per_link.clone(),
            },
        );
        Ok(())
    }

    /// Returns exactly what `allocate` reserved for this placement's request.
    pub fn release(&mut self, placement: &Placement) -> Result<(), SubstrateError> {
        if placement.is_empty() {
            return Ok(());
        }
        let reservation = self
            .reservations
            .remove(&placement.nslr_id)
            .ok_or(SubstrateError::DoubleRelease(placement.nslr_id))?;
        for (n, cpu) in reservation.cpu {
            let node = &mut self.nodes[n];
            node.cpu_available += cpu;
            debug_assert!(node.cpu_available <= node.cpu_capacity);
        }
        for (l, bw) in reservation.bw {
            let link = &mut self.links[l];
            link.bw_available += bw;
            debug_assert!(link.bw_available <= link.bw_capacity);
        }
        Ok(())
    }

    /// Plain-text edge list, one `node_u node_v bw_capacity` line per link.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for l in &self.links {
            writeln!(out, "{} {} {}", l.endpoints.0, l.endpoints.1, l.bw_capacity)?;
        }
        Ok(())
    }

    /// Plain-text node table, one `id region cpu_capacity` line per node.
    pub fn write_node_table<W: Write>(&self, mut out: W) -> io::Result<()> {
        for n in &self.nodes {
            writeln!(out, "{} {} {}", n.id, n.region, n.cpu_capacity)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::Placement;

    fn line(n: usize, bw: Units) -> SubstrateNetwork {
        let nodes = vec![(NodeRegion::Core, 10); n];
        let links: Vec<_> = (0..n - 1).map(|i| (i, i + 1, bw)).collect();
        SubstrateNetwork::from_parts(&nodes, &links).unwrap()
    }

    fn placement(id: u64, cpu: &[(NodeId, Units)], bw: &[(LinkId, Units)]) -> Placement {
        Placement::from_aggregates(id, cpu.iter().copied().collect(), bw.iter().copied().collect())
    }

    #[test]
    fn smallest_ba_graph() {
        let sn = SubstrateNetwork::generate(2, 1, 0.5, &CapacityProfile::default(), 7).unwrap();
        assert_eq!(sn.nodes().len(), 2);
        assert_eq!(sn.links().len(), 1);
        let edge = sn.nodes().iter().filter(|n| n.region == NodeRegion::Edge).count();
        assert_eq!(edge, 1);
    }

    #[test]
    fn ba_link_count_and_regions() {
        let profile = CapacityProfile::default();
        let sn = SubstrateNetwork::generate(64, 2, 0.5, &profile, 1).unwrap();
        assert_eq!(sn.nodes().len(), 64);
        assert_eq!(sn.links().len(), 2 * 62 + 1);
        assert!(sn.is_connected());
        let edges: Vec<_> = sn
            .nodes()
            .iter()
            .filter(|n| n.region == NodeRegion::Edge)
            .collect();
        assert_eq!(edges.len(), 32);
        let max_edge_degree = edges.iter().map(|n| sn.degree(n.id)).max().unwrap();
        let min_core_degree = sn
            .nodes()
            .iter()
            .filter(|n| n.region == NodeRegion::Core)
            .map(|n| sn.degree(n.id))
            .min()
            .unwrap();
        assert!(max_edge_degree <= min_core_degree);
        for n in sn.nodes() {
            let want = match n.region {
                NodeRegion::Core => profile.core_cpu,
                NodeRegion::Edge => profile.edge_cpu,
            };
            assert_eq!(n.cpu_capacity, want);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = CapacityProfile::default();
        let dump = |sn: &SubstrateNetwork| {
            let mut buf = Vec::new();
            sn.write_edge_list(&mut buf).unwrap();
            sn.write_node_table(&mut buf).unwrap();
            buf
        };
        let a = SubstrateNetwork::generate(64, 2, 0.5, &p, 1).unwrap();
        let b = SubstrateNetwork::generate(64, 2, 0.5, &p, 1).unwrap();
        assert_eq!(dump(&a), dump(&b));
        let c = SubstrateNetwork::generate(64, 2, 0.5, &p, 2).unwrap();
        assert_ne!(dump(&a), dump(&c));
    }

    #[test]
    fn generate_rejects_bad_parameters() {
        let p = CapacityProfile::default();
        assert!(SubstrateNetwork::generate(2, 2, 0.5, &p, 0).is_err());
        assert!(SubstrateNetwork::generate(5, 0, 0.5, &p, 0).is_err());
        assert!(SubstrateNetwork::generate(5, 1, 1.5, &p, 0).is_err());
    }

    #[test]
    fn from_parts_rejects_bad_graphs() {
        let n = [(NodeRegion::Core, 1); 3];
        assert!(SubstrateNetwork::from_parts(&n, &[(0, 0, 1), (1, 2, 1)]).is_err());
        assert!(SubstrateNetwork::from_parts(&n, &[(0, 1, 1), (1, 0, 1), (1, 2, 1)]).is_err());
        assert!(SubstrateNetwork::from_parts(&n, &[(0, 1, 1)]).is_err());
    }

    #[test]
    fn embedding_potential_examples() {
        let nodes = [
            (NodeRegion::Core, 10),
            (NodeRegion::Core, 0),
            (NodeRegion::Edge, 4),
        ];
        let sn = SubstrateNetwork::from_parts(&nodes, &[(0, 1, 5), (0, 2, 3)]).unwrap();
        assert_eq!(sn.embedding_potential(0), 80.0);
        assert_eq!(sn.embedding_potential(1), 0.0);

        let mut sn = SubstrateNetwork::from_parts(&nodes, &[(0, 1, 5), (0, 2, 3)]).unwrap();
        sn.allocate(&placement(1, &[], &[(1, 3)])).unwrap();
        assert_eq!(sn.embedding_potential(2), 0.0);
    }

    #[test]
    fn path_single_link_and_saturation() {
        let sn = line(2, 10);
        assert_eq!(sn.shortest_feasible_path(0, 1, 10, 4), Some(vec![0]));
        assert_eq!(sn.shortest_feasible_path(0, 1, 11, 4), None);
    }

    #[test]
    fn path_detours_around_saturated_diamond() {
        // Two-hop routes 0-1-3 and 0-2-3, plus a 1-2 rung.
        let nodes = [(NodeRegion::Core, 10); 4];
        let links = [(0, 1, 10), (1, 3, 1), (0, 2, 10), (2, 3, 10), (1, 2, 10)];
        let mut sn = SubstrateNetwork::from_parts(&nodes, &links).unwrap();
        sn.allocate(&placement(9, &[], &[(3, 10)])).unwrap();
        assert_eq!(sn.shortest_feasible_path(0, 3, 5, 2), None);
        assert_eq!(sn.shortest_feasible_path(0, 3, 1, 2), Some(vec![0, 1]));
        let mut sn = SubstrateNetwork::from_parts(
            &nodes,
            &[(0, 1, 1), (1, 3, 10), (0, 2, 10), (2, 3, 1), (1, 2, 10)],
        )
        .unwrap();
        // Both two-hop routes are too thin; 0-2-1-3 is the three-hop way round.
        assert_eq!(sn.shortest_feasible_path(0, 3, 5, 3), Some(vec![2, 4, 1]));
        assert_eq!(sn.shortest_feasible_path(0, 3, 5, 2), None);
        sn.allocate(&placement(1, &[], &[(4, 6)])).unwrap();
        assert_eq!(sn.shortest_feasible_path(0, 3, 5, 3), None);
    }

    #[test]
    fn path_ties_prefer_smaller_node_ids() {
        let nodes = [(NodeRegion::Core, 10); 4];
        // 0-2-3 declared before 0-1-3.
        let links = [(0, 2, 10), (2, 3, 10), (0, 1, 10), (1, 3, 10)];
        let sn = SubstrateNetwork::from_parts(&nodes, &links).unwrap();
        assert_eq!(sn.shortest_feasible_path(0, 3, 1, 4), Some(vec![2, 3]));
    }

    #[test]
    fn allocate_and_release() {
        let mut sn = line(3, 10);
        let before = sn.availability();
        sn.allocate(&Placement::empty(1)).unwrap();
        assert_eq!(sn.availability(), before);

        sn.allocate(&placement(2, &[(1, 5)], &[])).unwrap();
        assert_eq!(sn.node(1).cpu_available(), 5);

        let p = placement(3, &[(0, 12)], &[]);
        assert!(matches!(
            sn.allocate(&p),
            Err(SubstrateError::InfeasiblePlacement { .. })
        ));
        assert_eq!(sn.node(0).cpu_available(), 10);
        sn.release(&placement(2, &[(1, 5)], &[])).unwrap();
        assert_eq!(sn.availability(), before);
        assert_eq!(
            sn.release(&placement(2, &[(1, 5)], &[])),
            Err(SubstrateError::DoubleRelease(2))
        );
        sn.release(&Placement::empty(5)).unwrap();
    }

    #[test]
    fn infeasible_link_demand_leaves_nodes_untouched() {
        let mut sn = line(3, 10);
        let before = sn.availability();
        let p = placement(1, &[(0, 3), (2, 3)], &[(0, 4), (1, 11)]);
        assert!(sn.allocate(&p).is_err());
        assert_eq!(sn.availability(), before);
    }

    #[test]
    fn interleaved_release_matches_single_allocation() {
        let base = line(3, 10);
        let p1 = placement(1, &[(0, 3), (1, 2)], &[(0, 4)]);
        let p2 = placement(2, &[(1, 5), (2, 1)], &[(0, 2), (1, 7)]);
        let mut sn = base.clone();
        sn.allocate(&p1).unwrap();
        sn.allocate(&p2).unwrap();
        sn.release(&p1).unwrap();
        let mut only = base.clone();
        only.allocate(&p2).unwrap();
        assert_eq!(sn.availability(), only.availability());
    }

    #[test]
    fn dumps_are_plain_text() {
        let sn = line(2, 7);
        let mut e = Vec::new();
        sn.write_edge_list(&mut e).unwrap();
        assert_eq!(String::from_utf8(e).unwrap(), "0 1 7\n");
        let mut n = Vec::new();
        sn.write_node_table(&mut n).unwrap();
        assert_eq!(String::from_utf8(n).unwrap(), "0 core 10\n1 core 10\n");
    }
}
