//! Scenarios: road graph, signal phases, OD demand with time-varying flow
//! profiles, feasible routes and derived agent placements.
//!
//! Routes are written the way a traffic engineer lists them, as interior node
//! sequences (`"1 3 4 5"`). An interior origin or destination is reached
//! through the external node attached to it, so every resolved route runs
//! from an external source to an external sink.

mod doc;
mod geometry;
mod placement;

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

pub use doc::*;
pub use geometry::{movements_conflict, Movement, Phase, Turn};
pub use placement::{DownstreamEdge, RaPlacement};

/// Built-in modified Sioux Falls scenario.
pub const SIOUX_FALLS_TOML: &str = include_str!("../../data/sioux_falls.toml");
/// Two-signal desk-scale scenario used for training smoke runs.
pub const MINI_TOML: &str = include_str!("../../data/mini_two_signal.toml");
/// Six-intersection grid with three routing agents.
pub const EXAMPLE_GRID_TOML: &str = include_str!("../../data/example_grid.toml");

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("time {t} s outside the episode horizon [0, {horizon})")]
    OutOfHorizon { t: f64, horizon: f64 },
}

impl ScenarioError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        ScenarioError::Invalid(msg.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Signalized,
    Priority,
    External,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub x: f64,
    pub y: f64,
    pub inbound: Vec<usize>,
    pub outbound: Vec<usize>,
    /// Adjacent nodes sorted counter-clockwise from east.
    pub neighbours: Vec<usize>,
    /// Empty unless signalised.
    pub phases: Vec<Phase>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub index: usize,
    pub from: usize,
    pub to: usize,
    pub length_m: f64,
    pub lanes: u32,
    pub free_flow_mps: f64,
    pub saturation_vps: f64,
}

impl Edge {
    /// Whole ticks needed to traverse the edge at free-flow speed.
    pub fn free_flow_ticks(&self) -> u32 {
        let exact = self.length_m / self.free_flow_mps;
        ((exact - 1e-9).ceil() as u32).max(1)
    }

    /// Storage in vehicles at a 7.5 m jam spacing.
    pub fn jam_capacity(&self) -> usize {
        ((self.lanes as f64 * self.length_m / 7.5).floor() as usize).max(1)
    }
}

/// One lane of an approach edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaneRef {
    pub edge: usize,
    pub lane: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub movements: Vec<Movement>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<(usize, usize), usize>,
    movement_index: HashMap<(usize, usize), usize>,
}

impl Network {
    pub fn node_by_id(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edge_between(&self, from: usize, to: usize) -> Option<usize> {
        self.edge_index.get(&(from, to)).copied()
    }

    pub fn movement(&self, from_edge: usize, to_edge: usize) -> Option<usize> {
        self.movement_index.get(&(from_edge, to_edge)).copied()
    }

    /// All lanes of all inbound edges of a node, in edge order.
    pub fn approach_lanes(&self, node: usize) -> Vec<LaneRef> {
        self.nodes[node]
            .inbound
            .iter()
            .flat_map(|&e| (0..self.edges[e].lanes as usize).map(move |lane| LaneRef { edge: e, lane }))
            .collect()
    }

    /// The external node attached to an interior node, if exactly one.
    pub fn gateway(&self, node: usize) -> Option<usize> {
        let mut ext = self.nodes[node]
            .neighbours
            .iter()
            .copied()
            .filter(|&u| self.nodes[u].kind == NodeKind::External);
        match (ext.next(), ext.next()) {
            (Some(g), None) => Some(g),
            _ => None,
        }
    }

    pub fn conflict(&self, a: usize, b: usize) -> bool {
        movements_conflict(&self.nodes, &self.edges, &self.movements[a], &self.movements[b])
    }

    pub fn signalized_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == NodeKind::Signalized)
            .map(|(i, _)| i)
    }

    fn from_doc(doc: &NetworkSection, phases: &PhasesSection) -> Result<Self, ScenarioError> {
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        let mut node_index = HashMap::new();
        for n in &doc.nodes {
            if node_index.insert(n.id.clone(), nodes.len()).is_some() {
                return Err(ScenarioError::invalid(format!("duplicate node {:?}", n.id)));
            }
            nodes.push(Node {
                id: n.id.clone(),
                kind: match n.kind {
                    NodeKindDoc::Signalized => NodeKind::Signalized,
                    NodeKindDoc::Priority => NodeKind::Priority,
                    NodeKindDoc::External => NodeKind::External,
                },
                x: n.x,
                y: n.y,
                inbound: Vec::new(),
                outbound: Vec::new(),
                neighbours: Vec::new(),
                phases: Vec::new(),
            });
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_index = HashMap::new();
        for road in &doc.roads {
            let lookup = |id: &str| {
                node_index
                    .get(id)
                    .copied()
                    .ok_or_else(|| ScenarioError::invalid(format!("road {}-{}: unknown node {id:?}", road.from, road.to)))
            };
            let (a, b) = (lookup(&road.from)?, lookup(&road.to)?);
            if a == b {
                return Err(ScenarioError::invalid(format!("road {}-{} is a self loop", road.from, road.to)));
            }
            let length_m = road.length_m.unwrap_or(doc.default_length_m);
            let lanes = road.lanes.unwrap_or(doc.default_lanes);
            let free_flow_mps = road.free_flow_mps.unwrap_or(doc.default_free_flow_mps);
            let saturation_vps = road.saturation_vps.unwrap_or(doc.default_saturation_vps);
            if !(length_m > 0.0) {
                return Err(ScenarioError::invalid(format!("road {}-{}: length must be > 0", road.from, road.to)));
            }
            if lanes < 1 {
                return Err(ScenarioError::invalid(format!("road {}-{}: lanes must be >= 1", road.from, road.to)));
            }
            if !(free_flow_mps > 0.0) {
                return Err(ScenarioError::invalid(format!(
                    "road {}-{}: free-flow speed must be > 0",
                    road.from, road.to
                )));
            }
            if !(saturation_vps > 0.0) {
                return Err(ScenarioError::invalid(format!(
                    "road {}-{}: saturation flow must be > 0",
                    road.from, road.to
                )));
            }
            let dirs: &[(usize, usize)] = if road.two_way { &[(a, b), (b, a)] } else { &[(a, b)] };
            for &(u, v) in dirs {
                if edge_index.insert((u, v), edges.len()).is_some() {
                    return Err(ScenarioError::invalid(format!(
                        "duplicate directed edge {}->{}",
                        nodes[u].id, nodes[v].id
                    )));
                }
                edges.push(Edge {
                    index: edges.len(),
                    from: u,
                    to: v,
                    length_m,
                    lanes,
                    free_flow_mps,
                    saturation_vps,
                });
            }
        }
        for e in &edges {
            nodes[e.from].outbound.push(e.index);
            nodes[e.to].inbound.push(e.index);
        }
        geometry::order_neighbours(&mut nodes, &edges);

        let movements = geometry::build_movements(&nodes, &edges);
        let movement_index: HashMap<(usize, usize), usize> =
            movements.iter().map(|m| ((m.from_edge, m.to_edge), m.index)).collect();

        let overrides: HashMap<&str, &PhaseOverrideDoc> =
            phases.overrides.iter().map(|o| (o.node.as_str(), o)).collect();
        for o in &phases.overrides {
            match node_index.get(&o.node) {
                Some(&v) if nodes[v].kind == NodeKind::Signalized => {}
                Some(_) => {
                    return Err(ScenarioError::invalid(format!(
                        "phase override for non-signalised node {:?}",
                        o.node
                    )))
                }
                None => return Err(ScenarioError::invalid(format!("phase override: unknown node {:?}", o.node))),
            }
        }

        for v in 0..nodes.len() {
            match nodes[v].kind {
                NodeKind::External => continue,
                NodeKind::Priority => continue,
                NodeKind::Signalized => {}
            }
            if nodes[v].inbound.len() < 2 {
                return Err(ScenarioError::invalid(format!(
                    "signalised node {:?} needs at least 2 inbound edges",
                    nodes[v].id
                )));
            }
            let node_movements: Vec<&Movement> = movements.iter().filter(|m| m.node == v).collect();
            let lists = match overrides.get(nodes[v].id.as_str()) {
                Some(o) => geometry::override_phases(v, o, &node_index, &edge_index, &movement_index)?,
                None => geometry::default_phases(&nodes, v, &edges, &node_movements),
            };
            if lists.is_empty() {
                return Err(ScenarioError::invalid(format!("signalised node {:?} has no phases", nodes[v].id)));
            }
            for list in &lists {
                for (i, &a) in list.iter().enumerate() {
                    for &b in &list[i + 1..] {
                        if movements_conflict(&nodes, &edges, &movements[a], &movements[b]) {
                            return Err(ScenarioError::invalid(format!(
                                "node {:?}: phase holds conflicting movements {a} and {b}",
                                nodes[v].id
                            )));
                        }
                    }
                }
            }
            nodes[v].phases = lists
                .into_iter()
                .enumerate()
                .map(|(index, movements)| Phase { index, movements })
                .collect();
        }

        Ok(Network {
            nodes,
            edges,
            movements,
            node_index,
            edge_index,
            movement_index,
        })
    }
}

/// Piecewise-linear ratio of current to peak flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowProfile {
    pub kind: u32,
    pub points: Vec<(f64, f64)>,
}

impl FlowProfile {
    pub fn constant(kind: u32, ratio: f64, horizon_s: f64) -> Self {
        Self {
            kind,
            points: vec![(0.0, ratio), (horizon_s, ratio)],
        }
    }

    /// Interpolated ratio; held flat outside the breakpoints.
    pub fn ratio_at(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((t0, r0), (t1, r1)) = (w[0], w[1]);
            if t <= t1 {
                if t1 == t0 {
                    return r1;
                }
                return r0 + (r1 - r0) * (t - t0) / (t1 - t0);
            }
        }
        pts[pts.len() - 1].1
    }
}

/// Ratio of a profile at `t`, checked against the episode horizon.
pub fn flow_ratio(profile: &FlowProfile, t: f64, horizon_s: f64) -> Result<f64, ScenarioError> {
    if !(0.0..horizon_s).contains(&t) {
        return Err(ScenarioError::OutOfHorizon { t, horizon: horizon_s });
    }
    Ok(profile.ratio_at(t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    /// Node ids as written in the scenario, e.g. `["1", "3", "4", "5"]`.
    pub label: Vec<String>,
    /// Full node path including the source and sink external nodes.
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
    /// `movements[k]` joins `edges[k]` to `edges[k + 1]`.
    pub movements: Vec<usize>,
    pub free_flow_ticks: u32,
    pub length_m: f64,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.label.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdPair {
    pub index: usize,
    pub origin: usize,
    pub destination: usize,
    pub peak_vph: f64,
    pub profile: u32,
    pub routes: Vec<Route>,
    pub declared_ras: Vec<String>,
    /// Minimum free-flow time route, ties broken by listing order.
    pub predefined: usize,
}

/// A problem found while resolving routes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based demand row.
    pub od: usize,
    /// 1-based route within the row.
    pub route: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OD {} route {}: {}", self.od, self.route, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub network: Network,
    pub ods: Vec<OdPair>,
    pub profiles: Vec<FlowProfile>,
    pub episode_s: u32,
    pub control_step_s: u32,
    pub transition_s: u32,
    /// Signalised nodes controlled by signal agents, in node order.
    pub signal_agents: Vec<usize>,
    pub routing_agents: Vec<RaPlacement>,
    pub hyper: Hyperparameters,
    /// The document this scenario was built from.
    pub source: String,
}

/// Load and validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_toml(&text)
}

/// The modified Sioux Falls network with its 26 OD pairs.
pub fn build_sioux_falls() -> Scenario {
    Scenario::from_toml(SIOUX_FALLS_TOML).expect("built-in Sioux Falls scenario is valid")
}

/// Place routing agents at the fork points of every OD pair's routes.
pub fn place_routing_agents(scenario: &Scenario) -> Vec<RaPlacement> {
    placement::place(&scenario.ods)
}

/// Check every route of a scenario document against its network.
///
/// Returns one diagnostic per violated route invariant; an empty list means
/// every route is well formed.
pub fn validate_routes(doc: &ScenarioDoc) -> Vec<Diagnostic> {
    let network = match Network::from_doc(&doc.network, &doc.phases) {
        Ok(n) => n,
        Err(e) => {
            return vec![Diagnostic {
                od: 0,
                route: 0,
                message: e.to_string(),
            }]
        }
    };
    let mut diags = Vec::new();
    for (i, od) in doc.demand.od.iter().enumerate() {
        for (j, text) in od.routes.iter().enumerate() {
            if let Err(message) = resolve_route(&network, od, text) {
                diags.push(Diagnostic {
                    od: i + 1,
                    route: j + 1,
                    message,
                });
            }
        }
    }
    diags
}

fn resolve_route(network: &Network, od: &OdDoc, text: &str) -> Result<Route, String> {
    let label: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    if label.len() < 2 {
        return Err("route needs at least two nodes".into());
    }
    let mut interior = Vec::with_capacity(label.len());
    for id in &label {
        match network.node_by_id(id) {
            Some(v) => interior.push(v),
            None => return Err(format!("unknown node {id:?}")),
        }
    }
    if label[0] != od.origin {
        return Err(format!("first node {} is not the origin {}", label[0], od.origin));
    }
    if label[label.len() - 1] != od.destination {
        return Err(format!(
            "last node {} is not the destination {}",
            label[label.len() - 1],
            od.destination
        ));
    }
    let mut nodes = Vec::with_capacity(interior.len() + 2);
    let first = interior[0];
    if network.nodes[first].kind != NodeKind::External {
        match network.gateway(first) {
            Some(g) => nodes.push(g),
            None => return Err(format!("origin {} has no unique external gateway", label[0])),
        }
    }
    nodes.extend_from_slice(&interior);
    let last = interior[interior.len() - 1];
    if network.nodes[last].kind != NodeKind::External {
        match network.gateway(last) {
            Some(g) => nodes.push(g),
            None => return Err(format!("destination {} has no unique external gateway", label[label.len() - 1])),
        }
    }
    let mut edges = Vec::with_capacity(nodes.len() - 1);
    for w in nodes.windows(2) {
        match network.edge_between(w[0], w[1]) {
            Some(e) => edges.push(e),
            None => {
                return Err(format!(
                    "no road from {} to {}",
                    network.nodes[w[0]].id, network.nodes[w[1]].id
                ))
            }
        }
    }
    for (k, &v) in nodes.iter().enumerate() {
        let interior_node = k > 0 && k + 1 < nodes.len();
        if interior_node && network.nodes[v].kind == NodeKind::External {
            return Err(format!("passes through external node {}", network.nodes[v].id));
        }
    }
    let mut movements = Vec::with_capacity(edges.len().saturating_sub(1));
    for w in edges.windows(2) {
        match network.movement(w[0], w[1]) {
            Some(m) => movements.push(m),
            None => {
                return Err(format!(
                    "U-turn at node {}",
                    network.nodes[network.edges[w[0]].to].id
                ))
            }
        }
    }
    let free_flow_ticks = edges.iter().map(|&e| network.edges[e].free_flow_ticks()).sum();
    let length_m = edges.iter().map(|&e| network.edges[e].length_m).sum();
    Ok(Route {
        label,
        nodes,
        edges,
        movements,
        free_flow_ticks,
        length_m,
    })
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let doc = ScenarioDoc::parse(text)?;
        Self::from_doc(&doc, text.to_string())
    }

    pub fn from_doc(doc: &ScenarioDoc, source: String) -> Result<Self, ScenarioError> {
        let network = Network::from_doc(&doc.network, &doc.phases)?;

        let agents = &doc.agents;
        if agents.control_step_s == 0 || agents.episode_s == 0 || agents.episode_s % agents.control_step_s != 0 {
            return Err(ScenarioError::invalid(format!(
                "episode length {} s must be a positive multiple of the control step {} s",
                agents.episode_s, agents.control_step_s
            )));
        }
        let horizon = agents.episode_s as f64;

        let mut profiles = Vec::new();
        for p in &doc.profiles.profile {
            if p.points.is_empty() {
                return Err(ScenarioError::invalid(format!("profile {} has no points", p.kind)));
            }
            if profiles.iter().any(|q: &FlowProfile| q.kind == p.kind) {
                return Err(ScenarioError::invalid(format!("duplicate profile type {}", p.kind)));
            }
            let points: Vec<(f64, f64)> = p.points.iter().map(|[t, r]| (*t, *r)).collect();
            if points.windows(2).any(|w| w[1].0 < w[0].0) {
                return Err(ScenarioError::invalid(format!("profile {} times must be non-decreasing", p.kind)));
            }
            if points.iter().any(|&(_, r)| !(0.0..=1.0).contains(&r)) {
                return Err(ScenarioError::invalid(format!("profile {} ratios must lie in [0, 1]", p.kind)));
            }
            if points[0].0 > 0.0 || points[points.len() - 1].0 < horizon {
                return Err(ScenarioError::invalid(format!(
                    "profile {} must cover the episode [0, {horizon}] s",
                    p.kind
                )));
            }
            profiles.push(FlowProfile { kind: p.kind, points });
        }

        if doc.demand.od.is_empty() {
            return Err(ScenarioError::invalid("no demand: the OD list is empty"));
        }
        let mut ods = Vec::with_capacity(doc.demand.od.len());
        for (i, od) in doc.demand.od.iter().enumerate() {
            let row = i + 1;
            let origin = network
                .node_by_id(&od.origin)
                .ok_or_else(|| ScenarioError::invalid(format!("OD {row}: unknown node {:?}", od.origin)))?;
            let destination = network
                .node_by_id(&od.destination)
                .ok_or_else(|| ScenarioError::invalid(format!("OD {row}: unknown node {:?}", od.destination)))?;
            if !(od.peak_vph > 0.0) {
                return Err(ScenarioError::invalid(format!("OD {row}: peak flow must be > 0")));
            }
            if od.peak_vph >= 3600.0 {
                return Err(ScenarioError::invalid(format!(
                    "OD {row}: peak flow must stay below one vehicle per second"
                )));
            }
            if !profiles.iter().any(|p| p.kind == od.profile) {
                return Err(ScenarioError::invalid(format!("OD {row}: unknown profile type {}", od.profile)));
            }
            if od.routes.is_empty() {
                return Err(ScenarioError::invalid(format!("OD {row}: needs at least one route")));
            }
            let mut routes = Vec::with_capacity(od.routes.len());
            for (j, text) in od.routes.iter().enumerate() {
                let route = resolve_route(&network, od, text)
                    .map_err(|m| ScenarioError::invalid(format!("OD {row} route {}: {m}", j + 1)))?;
                if routes.iter().any(|r: &Route| r.nodes == route.nodes) {
                    return Err(ScenarioError::invalid(format!("OD {row}: duplicate route {text:?}")));
                }
                routes.push(route);
            }
            let predefined = routes
                .iter()
                .enumerate()
                .min_by_key(|(k, r)| (r.free_flow_ticks, *k))
                .map(|(k, _)| k)
                .unwrap_or(0);
            ods.push(OdPair {
                index: i,
                origin,
                destination,
                peak_vph: od.peak_vph,
                profile: od.profile,
                routes,
                declared_ras: od.ras.clone(),
                predefined,
            });
        }

        if let Some(expected) = doc.demand.expected_total_peak_vph {
            let total: f64 = ods.iter().map(|o| o.peak_vph).sum();
            if (total - expected).abs() > 1e-6 {
                return Err(ScenarioError::invalid(format!(
                    "total peak flow {total} veh/h differs from the recorded {expected} veh/h"
                )));
            }
        }

        let routing_agents = placement::place(&ods);
        for od in &ods {
            let derived: Vec<&str> = routing_agents
                .iter()
                .filter(|r| r.od == od.index)
                .map(|r| r.name.as_str())
                .collect();
            if derived != od.declared_ras.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(ScenarioError::invalid(format!(
                    "OD {}: fork structure yields routing agents {:?} but {:?} are declared",
                    od.index + 1,
                    derived,
                    od.declared_ras
                )));
            }
        }

        let signal_agents: Vec<usize> = network.signalized_nodes().collect();
        for &v in &signal_agents {
            if network.nodes[v].phases.len() < 2 {
                return Err(ScenarioError::invalid(format!(
                    "signalised node {:?} needs at least 2 phases",
                    network.nodes[v].id
                )));
            }
        }
        if let Some(n) = agents.expected_signal_agents {
            if n != signal_agents.len() {
                return Err(ScenarioError::invalid(format!(
                    "{} signal agents derived but {n} expected",
                    signal_agents.len()
                )));
            }
        }
        if let Some(n) = agents.expected_routing_agents {
            if n != routing_agents.len() {
                return Err(ScenarioError::invalid(format!(
                    "{} routing agents derived but {n} expected",
                    routing_agents.len()
                )));
            }
        }

        Ok(Scenario {
            name: doc.network.name.clone(),
            network,
            ods,
            profiles,
            episode_s: agents.episode_s,
            control_step_s: agents.control_step_s,
            transition_s: doc.phases.transition_s,
            signal_agents,
            routing_agents,
            hyper: doc.hyperparameters.clone(),
            source,
        })
    }

    pub fn control_steps(&self) -> usize {
        (self.episode_s / self.control_step_s) as usize
    }

    pub fn profile(&self, kind: u32) -> &FlowProfile {
        self.profiles
            .iter()
            .find(|p| p.kind == kind)
            .expect("profile types are validated at load")
    }

    /// Instantaneous demand of an OD pair in veh/h.
    pub fn demand_vph(&self, od: usize, t: f64) -> f64 {
        let od = &self.ods[od];
        od.peak_vph * self.profile(od.profile).ratio_at(t)
    }

    pub fn total_peak_vph(&self) -> f64 {
        self.ods.iter().map(|o| o.peak_vph).sum()
    }

    pub fn node_id(&self, v: usize) -> &str {
        &self.network.nodes[v].id
    }
}

#[cfg(test)]
mod tests;
