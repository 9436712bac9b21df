//! Routing-agent placement at route fork points.

use super::OdPair;

/// A downstream edge observed by a routing agent, `hops` intersections past
/// its fork node.
#[derive(Debug, Clone, PartialEq)]
pub struct DownstreamEdge {
    pub edge: usize,
    pub hops: u32,
}

/// One routing agent: sits on the edge just upstream of a fork where the
/// remaining route set of an OD pair diverges.
#[derive(Debug, Clone, PartialEq)]
pub struct RaPlacement {
    pub name: String,
    pub od: usize,
    pub fork_node: usize,
    /// Position of the fork node in each of `routes`' node lists.
    pub fork_depth: usize,
    pub upstream_edge: usize,
    /// Indices into the OD pair's route list, in listing order.
    pub routes: Vec<usize>,
    pub downstream: Vec<DownstreamEdge>,
}

impl RaPlacement {
    /// Position of the upstream edge in every feasible route's edge list.
    pub fn upstream_pos(&self) -> usize {
        self.fork_depth - 1
    }
}

/// Place routing agents for every OD pair.
///
/// The routes of a pair form a prefix tree; every tree node with two or more
/// children is a fork. Agents are numbered in OD order, then upstream first,
/// then in route-listing order.
pub(super) fn place(ods: &[OdPair]) -> Vec<RaPlacement> {
    let mut out = Vec::new();
    for od in ods {
        if od.routes.len() < 2 {
            continue;
        }
        let all: Vec<usize> = (0..od.routes.len()).collect();
        find_forks(od, &all, 0, &mut out);
    }
    for (k, ra) in out.iter_mut().enumerate() {
        ra.name = format!("RA{}", k + 1);
    }
    out
}

fn find_forks(od: &OdPair, set: &[usize], depth: usize, out: &mut Vec<RaPlacement>) {
    // Every route in `set` shares nodes[..=depth]; group by the next node.
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for &r in set {
        let nodes = &od.routes[r].nodes;
        let Some(&next) = nodes.get(depth + 1) else { continue };
        match groups.iter_mut().find(|(n, _)| *n == next) {
            Some((_, g)) => g.push(r),
            None => groups.push((next, vec![r])),
        }
    }
    if groups.len() >= 2 && depth >= 1 {
        let first = &od.routes[set[0]];
        let fork_node = first.nodes[depth];
        let upstream_edge = first.edges[depth - 1];
        let mut downstream: Vec<DownstreamEdge> = Vec::new();
        for &r in set {
            for (k, &edge) in od.routes[r].edges.iter().enumerate().skip(depth) {
                let hops = (k - depth) as u32;
                match downstream.iter_mut().find(|d| d.edge == edge) {
                    Some(d) => d.hops = d.hops.min(hops),
                    None => downstream.push(DownstreamEdge { edge, hops }),
                }
            }
        }
        // Stable: ties keep first-appearance order.
        downstream.sort_by_key(|d| d.hops);
        out.push(RaPlacement {
            name: String::new(),
            od: od.index,
            fork_node,
            fork_depth: depth,
            upstream_edge,
            routes: set.to_vec(),
            downstream,
        });
    }
    for (_, group) in groups {
        if group.len() >= 2 {
            find_forks(od, &group, depth + 1, out);
        }
    }
}
