//! Which agents exchange states and rewards, and how strongly.
//!
//! - A signal agent listens to the signal agents at adjacent signalised
//!   intersections and to every routing agent whose remaining routes pass
//!   its intersection.
//! - A routing agent listens to the signal agents on its remaining routes
//!   and to the other routing agents of its OD pair.
//!
//! Signal/routing links are weighted by `delta^d`, where `d` counts the
//! intersections between the signal and the routing agent's fork node.

use crate::netmodel::{NodeKind, Scenario};

/// A weighted link to another agent, `index` within that agent's kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relevant {
    pub index: usize,
    pub hops: u32,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelevanceGraph {
    /// Per signal agent: adjacent signal agents.
    pub sa_ss: Vec<Vec<usize>>,
    /// Per signal agent: routing agents whose routes cross it.
    pub sa_sr: Vec<Vec<Relevant>>,
    /// Per routing agent: the other routing agents of its OD pair.
    pub ra_rr: Vec<Vec<usize>>,
    /// Per routing agent: signal agents on its routes.
    pub ra_rs: Vec<Vec<Relevant>>,
}

pub fn build_relevance(scenario: &Scenario, delta: f64) -> RelevanceGraph {
    let net = &scenario.network;
    let mut sa_of_node = vec![None; net.nodes.len()];
    for (i, &v) in scenario.signal_agents.iter().enumerate() {
        sa_of_node[v] = Some(i);
    }

    let sa_ss = scenario
        .signal_agents
        .iter()
        .map(|&v| {
            let mut adj: Vec<usize> = net.nodes[v]
                .neighbours
                .iter()
                .filter(|&&u| net.nodes[u].kind == NodeKind::Signalized)
                .filter_map(|&u| sa_of_node[u])
                .collect();
            adj.sort_unstable();
            adj
        })
        .collect();

    let mut ra_rs = Vec::with_capacity(scenario.routing_agents.len());
    let mut ra_rr = Vec::with_capacity(scenario.routing_agents.len());
    for (i, ra) in scenario.routing_agents.iter().enumerate() {
        let od = &scenario.ods[ra.od];
        // Shortest hop count from the fork node to each signalised node.
        let mut hops: Vec<Option<u32>> = vec![None; scenario.signal_agents.len()];
        for &r in &ra.routes {
            for (k, &v) in od.routes[r].nodes.iter().enumerate().skip(ra.fork_depth) {
                if let Some(s) = sa_of_node[v] {
                    let d = (k - ra.fork_depth) as u32;
                    hops[s] = Some(hops[s].map_or(d, |h| h.min(d)));
                }
            }
        }
        ra_rs.push(
            hops.iter()
                .enumerate()
                .filter_map(|(s, h)| {
                    h.map(|d| Relevant {
                        index: s,
                        hops: d,
                        alpha: delta.powi(d as i32),
                    })
                })
                .collect::<Vec<_>>(),
        );
        ra_rr.push(
            scenario
                .routing_agents
                .iter()
                .enumerate()
                .filter(|&(j, other)| j != i && other.od == ra.od)
                .map(|(j, _)| j)
                .collect(),
        );
    }

    let mut sa_sr: Vec<Vec<Relevant>> = vec![Vec::new(); scenario.signal_agents.len()];
    for (j, links) in ra_rs.iter().enumerate() {
        for l in links {
            sa_sr[l.index].push(Relevant { index: j, ..*l });
        }
    }

    RelevanceGraph {
        sa_ss,
        sa_sr,
        ra_rr,
        ra_rs,
    }
}
