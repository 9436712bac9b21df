//! Turning movements, lane partitions and phase tables derived from node
//! coordinates.
//!
//! Neighbours of a node are ordered counter-clockwise by bearing. A movement
//! from neighbour `u` through `v` to neighbour `w` is classified by its
//! counter-clockwise offset `(idx(w) - idx(u)) mod m`: offset 1 is the
//! right-most turn and offset `m - 1` the left-most (right-hand traffic).

use std::collections::HashMap;

use super::{Edge, Node, NodeKind, PhaseOverrideDoc, ScenarioError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Left,
    Through,
    Right,
}

/// A permitted turning movement from an inbound edge to an outbound edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Movement {
    pub index: usize,
    pub node: usize,
    pub from_edge: usize,
    pub to_edge: usize,
    /// Lane of `from_edge` that vehicles making this movement queue in.
    pub lane: usize,
    pub turn: Turn,
    /// Counter-clockwise offset between entry and exit neighbours.
    pub offset: usize,
}

/// A set of simultaneously permitted, mutually non-conflicting movements.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub index: usize,
    /// Sorted movement indices.
    pub movements: Vec<usize>,
}

impl Phase {
    pub fn permits(&self, movement: usize) -> bool {
        self.movements.binary_search(&movement).is_ok()
    }
}

pub(super) fn bearing(from: &Node, to: &Node) -> f64 {
    let a = (to.y - from.y).atan2(to.x - from.x);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Sort each node's neighbours counter-clockwise starting from east.
pub(super) fn order_neighbours(nodes: &mut [Node], edges: &[Edge]) {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for e in edges {
        adj[e.from].push(e.to);
        adj[e.to].push(e.from);
    }
    for (v, list) in adj.iter_mut().enumerate() {
        list.sort_unstable();
        list.dedup();
        let centre = &nodes[v];
        let mut keyed: Vec<(f64, usize)> = list
            .iter()
            .map(|&u| (bearing(centre, &nodes[u]), u))
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        nodes[v].neighbours = keyed.into_iter().map(|(_, u)| u).collect();
    }
}

fn neighbour_pos(node: &Node, u: usize) -> usize {
    node.neighbours
        .iter()
        .position(|&n| n == u)
        .expect("neighbour lists cover every incident edge")
}

/// Enumerate movements at every non-external node and assign lanes.
///
/// Movements of one approach are sorted left-most first and the `k`-th one
/// queues in lane `min(k, lanes - 1)`, so a two-lane approach at a four-way
/// node gets a left-turn lane and a shared through/right lane.
pub(super) fn build_movements(nodes: &[Node], edges: &[Edge]) -> Vec<Movement> {
    let mut movements = Vec::new();
    for (v, node) in nodes.iter().enumerate() {
        if node.kind == NodeKind::External {
            continue;
        }
        let m = node.neighbours.len();
        for &e in &node.inbound {
            let u = edges[e].from;
            let pu = neighbour_pos(node, u);
            let mut outs: Vec<(usize, usize)> = node
                .outbound
                .iter()
                .filter(|&&f| edges[f].to != u)
                .map(|&f| {
                    let pw = neighbour_pos(node, edges[f].to);
                    ((pw + m - pu) % m, f)
                })
                .collect();
            // Left-most (largest counter-clockwise offset) first.
            outs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            let lanes = edges[e].lanes as usize;
            for (rank, (offset, f)) in outs.into_iter().enumerate() {
                let turn = if m == 2 {
                    Turn::Through
                } else if offset == 1 {
                    Turn::Right
                } else if offset == m - 1 {
                    Turn::Left
                } else {
                    Turn::Through
                };
                movements.push(Movement {
                    index: movements.len(),
                    node: v,
                    from_edge: e,
                    to_edge: f,
                    lane: rank.min(lanes - 1),
                    turn,
                    offset,
                });
            }
        }
    }
    movements
}

/// Whether two movements at the same node may not discharge together.
///
/// Each neighbour contributes an outbound point and, just counter-clockwise
/// of it, an inbound point on a circle around the node. Movements conflict
/// when they merge into the same exit or when their chords cross.
pub fn movements_conflict(nodes: &[Node], edges: &[Edge], a: &Movement, b: &Movement) -> bool {
    if a.node != b.node || a.from_edge == b.from_edge {
        return false;
    }
    if a.to_edge == b.to_edge {
        return true;
    }
    let node = &nodes[a.node];
    let point_in = |e: usize| 2 * neighbour_pos(node, edges[e].from) + 1;
    let point_out = |f: usize| 2 * neighbour_pos(node, edges[f].to);
    let (a1, a2) = (point_in(a.from_edge), point_out(a.to_edge));
    let (lo, hi) = (a1.min(a2), a1.max(a2));
    let inside = |p: usize| p > lo && p < hi;
    inside(point_in(b.from_edge)) != inside(point_out(b.to_edge))
}

/// Default phase table for a signalised node.
///
/// Four-approach nodes get the classic split: north-south through+right,
/// north-south left, east-west through+right, east-west left. Every other
/// layout gets one phase per approach carrying all of its movements.
pub(super) fn default_phases(
    nodes: &[Node],
    v: usize,
    edges: &[Edge],
    node_movements: &[&Movement],
) -> Vec<Vec<usize>> {
    let node = &nodes[v];
    let approaches: Vec<usize> = {
        let mut a: Vec<(usize, usize)> = node
            .inbound
            .iter()
            .map(|&e| (neighbour_pos(node, edges[e].from), e))
            .collect();
        a.sort_unstable();
        a.into_iter().map(|(_, e)| e).collect()
    };
    let mut phases: Vec<Vec<usize>> = Vec::new();
    if approaches.len() == 4 && node.neighbours.len() == 4 {
        // Approaches are sorted counter-clockwise, so 0/2 and 1/3 face each other.
        let angle = |e: usize| -> f64 {
            bearing(node, &nodes[edges[e].from]).sin().abs()
        };
        let pair_a = [approaches[0], approaches[2]];
        let pair_b = [approaches[1], approaches[3]];
        let (ns, ew) = if angle(pair_a[0]) + angle(pair_a[1]) >= angle(pair_b[0]) + angle(pair_b[1]) {
            (pair_a, pair_b)
        } else {
            (pair_b, pair_a)
        };
        for pair in [ns, ew] {
            let through: Vec<usize> = node_movements
                .iter()
                .filter(|m| pair.contains(&m.from_edge) && m.turn != Turn::Left)
                .map(|m| m.index)
                .collect();
            let left: Vec<usize> = node_movements
                .iter()
                .filter(|m| pair.contains(&m.from_edge) && m.turn == Turn::Left)
                .map(|m| m.index)
                .collect();
            phases.push(through);
            phases.push(left);
        }
    } else {
        for e in approaches {
            phases.push(
                node_movements
                    .iter()
                    .filter(|m| m.from_edge == e)
                    .map(|m| m.index)
                    .collect(),
            );
        }
    }
    phases.retain(|p| !p.is_empty());
    for p in &mut phases {
        p.sort_unstable();
    }
    phases
}

/// Resolve `"u>v>w"` movement strings of a phase override.
pub(super) fn override_phases(
    node_index: usize,
    doc: &PhaseOverrideDoc,
    ids: &HashMap<String, usize>,
    edge_index: &HashMap<(usize, usize), usize>,
    movement_index: &HashMap<(usize, usize), usize>,
) -> Result<Vec<Vec<usize>>, ScenarioError> {
    let mut phases = Vec::new();
    for phase in &doc.phases {
        let mut list = Vec::new();
        for spec in phase {
            let parts: Vec<&str> = spec.split('>').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(ScenarioError::invalid(format!(
                    "phase override at node {}: movement {spec:?} must be written from>via>to",
                    doc.node
                )));
            }
            let lookup = |id: &str| {
                ids.get(id)
                    .copied()
                    .ok_or_else(|| ScenarioError::invalid(format!("phase override: unknown node {id:?}")))
            };
            let (u, v, w) = (lookup(parts[0])?, lookup(parts[1])?, lookup(parts[2])?);
            if v != node_index {
                return Err(ScenarioError::invalid(format!(
                    "phase override at node {}: movement {spec:?} passes a different node",
                    doc.node
                )));
            }
            let e = edge_index.get(&(u, v));
            let f = edge_index.get(&(v, w));
            let m = match (e, f) {
                (Some(e), Some(f)) => movement_index.get(&(*e, *f)),
                _ => None,
            };
            match m {
                Some(&m) => list.push(m),
                None => {
                    return Err(ScenarioError::invalid(format!(
                        "phase override at node {}: no movement {spec:?}",
                        doc.node
                    )))
                }
            }
        }
        list.sort_unstable();
        list.dedup();
        phases.push(list);
    }
    Ok(phases)
}
