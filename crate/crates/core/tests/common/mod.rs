//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use slicesim::allocator::Placement;
use slicesim::slicegen::{required_region, Plane, SliceRequest, SliceType, VirtualLink, Vnf, VnfKind};
use slicesim::substrate::{LinkId, NodeId, NodeRegion, SubstrateNetwork, Units};

/// Random connected graph: a random spanning tree plus extra links.
pub fn random_network(rng: &mut impl Rng, n: usize, max_cpu: Units, max_bw: Units) -> SubstrateNetwork {
    let nodes: Vec<(NodeRegion, Units)> = (0..n)
        .map(|_| {
            let region = if rng.random_bool(0.5) {
                NodeRegion::Core
            } else {
                NodeRegion::Edge
            };
            (region, rng.random_range(0..=max_cpu))
        })
        .collect();
    let mut links = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        links.push((u, v, rng.random_range(0..=max_bw)));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if !links.iter().any(|&(a, b, _)| (a, b) == (u, v)) && rng.random_bool(0.3) {
                links.push((u, v, rng.random_range(0..=max_bw)));
            }
        }
    }
    let mut sn = SubstrateNetwork::from_parts(&nodes, &links).expect("valid random graph");
    // Knock availability below capacity on some elements.
    let cpu: BTreeMap<NodeId, Units> = sn
        .nodes()
        .iter()
        .filter_map(|node| {
            let c = rng.random_range(0..=node.cpu_capacity);
            (rng.random_bool(0.3) && c > 0).then_some((node.id, c))
        })
        .collect();
    let bw: BTreeMap<LinkId, Units> = sn
        .links()
        .iter()
        .filter_map(|l| {
            let b = rng.random_range(0..=l.bw_capacity);
            (rng.random_bool(0.3) && b > 0).then_some((l.id, b))
        })
        .collect();
    sn.allocate(&Placement::from_aggregates(u64::MAX, cpu, bw))
        .expect("background load fits");
    sn
}

/// Random request of 1..=max_vnfs VNFs wired as a random tree.
pub fn random_request(rng: &mut impl Rng, max_vnfs: usize, max_cpu: Units, max_bw: Units) -> SliceRequest {
    let stype = SliceType::ALL[rng.random_range(0..3)];
    let count = rng.random_range(1..=max_vnfs);
    let mut vnfs: Vec<Vnf> = (0..count)
        .map(|id| {
            let kind = [VnfKind::Amf, VnfKind::Smf, VnfKind::Upf][rng.random_range(0..3)];
            Vnf {
                id,
                kind,
                cpu_demand: rng.random_range(1..=max_cpu),
                plane: if kind == VnfKind::Upf {
                    Plane::UserPlane
                } else {
                    Plane::ControlPlane
                },
                backup_of: None,
            }
        })
        .collect();
    if count >= 2 && rng.random_bool(0.4) {
        let primary = rng.random_range(0..count - 1);
        let last = count - 1;
        vnfs[last].kind = vnfs[primary].kind;
        vnfs[last].plane = vnfs[primary].plane;
        vnfs[last].backup_of = Some(primary);
    }
    let vlinks = (1..count)
        .map(|v| {
            let u = rng.random_range(0..v);
            VirtualLink {
                endpoints: (u, v),
                bw_demand: rng.random_range(1..=max_bw),
                max_hops: rng.random_range(1..=4),
            }
        })
        .collect();
    SliceRequest {
        id: rng.random(),
        stype,
        arrival_time: 0.0,
        operational_time: 1.0,
        vnfs,
        vlinks,
    }
}

/// Every simple path from `src` to `dst` with at most `max_hops` links, as
/// node sequences, restricted to links whose availability is at least `bw`.
pub fn simple_paths(
    sn: &SubstrateNetwork,
    src: NodeId,
    dst: NodeId,
    bw: Units,
    max_hops: usize,
) -> Vec<Vec<NodeId>> {
    fn walk(
        sn: &SubstrateNetwork,
        path: &mut Vec<NodeId>,
        dst: NodeId,
        bw: Units,
        max_hops: usize,
        out: &mut Vec<Vec<NodeId>>,
    ) {
        let here = *path.last().unwrap();
        if here == dst {
            out.push(path.clone());
            return;
        }
        if path.len() > max_hops {
            return;
        }
        for next in 0..sn.nodes().len() {
            if path.contains(&next) {
                continue;
            }
            if let Some(l) = sn.link_between(here, next) {
                if sn.link(l).bw_available() >= bw {
                    path.push(next);
                    walk(sn, path, dst, bw, max_hops, out);
                    path.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(sn, &mut vec![src], dst, bw, max_hops, &mut out);
    out
}

pub fn node_path_links(sn: &SubstrateNetwork, nodes: &[NodeId]) -> Vec<LinkId> {
    nodes
        .windows(2)
        .map(|w| {
            sn.link_between(w[0], w[1])
                .expect("consecutive nodes are adjacent")
        })
        .collect()
}

/// Node sequence of a link path starting at `src`.
pub fn link_path_nodes(sn: &SubstrateNetwork, src: NodeId, links: &[LinkId]) -> Vec<NodeId> {
    let mut nodes = vec![src];
    for &l in links {
        let here = *nodes.last().unwrap();
        nodes.push(sn.link(l).other(here));
    }
    nodes
}

/// Exhaustive search for any placement satisfying region, anti-affinity,
/// CPU, hop and (jointly aggregated) bandwidth constraints.
pub fn feasible_placement_exists(sn: &SubstrateNetwork, req: &SliceRequest) -> bool {
    let n = sn.nodes().len();
    let k = req.vnfs.len();
    let mut map = vec![0usize; k];
    let total = n.pow(k as u32);
    'maps: for code in 0..total {
        let mut c = code;
        for slot in map.iter_mut() {
            *slot = c % n;
            c /= n;
        }
        let mut cpu = vec![0u64; n];
        for (v, &node) in req.vnfs.iter().zip(&map) {
            if let Some(region) = required_region(req.stype, v) {
                if sn.node(node).region != region {
                    continue 'maps;
                }
            }
            if let Some(p) = v.backup_of {
                if map[p] == node {
                    continue 'maps;
                }
            }
            cpu[node] += v.cpu_demand as u64;
        }
        if (0..n).any(|i| cpu[i] > sn.node(i).cpu_available() as u64) {
            continue;
        }
        let options: Vec<Vec<Vec<LinkId>>> = req
            .vlinks
            .iter()
            .map(|vl| {
                let (a, b) = (map[vl.endpoints.0], map[vl.endpoints.1]);
                if a == b {
                    vec![Vec::new()]
                } else {
                    simple_paths(sn, a, b, vl.bw_demand, vl.max_hops)
                        .iter()
                        .map(|p| node_path_links(sn, p))
                        .collect()
                }
            })
            .collect();
        let mut load = vec![0u64; sn.links().len()];
        if assign_paths(sn, req, &options, 0, &mut load) {
            return true;
        }
    }
    false
}

fn assign_paths(
    sn: &SubstrateNetwork,
    req: &SliceRequest,
    options: &[Vec<Vec<LinkId>>],
    i: usize,
    load: &mut Vec<u64>,
) -> bool {
    if i == options.len() {
        return true;
    }
    let bw = req.vlinks[i].bw_demand as u64;
    for path in &options[i] {
        if path
            .iter()
            .all(|&l| load[l] + bw <= sn.link(l).bw_available() as u64)
        {
            path.iter().for_each(|&l| load[l] += bw);
            let ok = assign_paths(sn, req, options, i + 1, load);
            path.iter().for_each(|&l| load[l] -= bw);
            if ok {
                return true;
            }
        }
    }
    false
}
