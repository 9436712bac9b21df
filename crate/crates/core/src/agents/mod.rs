//! Signal and routing agents: who they are, whom they listen to, what they
//! observe and how they are rewarded.
//!
//! Agents are indexed globally with all signal agents first (in scenario
//! node order) followed by all routing agents (in placement order).

mod observe;
mod relevance;
mod reward;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::netmodel::{Hyperparameters, LaneRef, RaPlacement, Scenario};

pub use observe::{Measurements, ObservationLayout, StepDump};
pub use relevance::{build_relevance, Relevant, RelevanceGraph};
pub use reward::{shared_rewards, RewardRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentKind {
    Signal,
    Routing,
}

/// `SA{n}` or `RA{n}`, 1-based as printed; `index` is 0-based within its kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId {
    pub kind: AgentKind,
    pub index: usize,
}

impl AgentId {
    pub fn sa(index: usize) -> Self {
        Self {
            kind: AgentKind::Signal,
            index,
        }
    }

    pub fn ra(index: usize) -> Self {
        Self {
            kind: AgentKind::Routing,
            index,
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AgentKind::Signal => write!(f, "SA{}", self.index + 1),
            AgentKind::Routing => write!(f, "RA{}", self.index + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalAgentSpec {
    pub id: AgentId,
    pub node: usize,
    /// Approach lanes, in inbound-edge order.
    pub lanes: Vec<LaneRef>,
    pub phases: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingAgentSpec {
    pub id: AgentId,
    pub placement: RaPlacement,
    /// Observed downstream edges with their distance weights.
    pub downstream: Vec<(usize, f64)>,
}

impl RoutingAgentSpec {
    pub fn routes(&self) -> usize {
        self.placement.routes.len()
    }
}

/// Everything static about the agent population of a scenario.
#[derive(Debug, Clone)]
pub struct AgentSet {
    pub signals: Vec<SignalAgentSpec>,
    pub routers: Vec<RoutingAgentSpec>,
    pub graph: RelevanceGraph,
    pub layouts: Vec<ObservationLayout>,
    pub hyper: Hyperparameters,
}

impl AgentSet {
    pub fn new(scenario: &Scenario) -> Self {
        let hyper = scenario.hyper.clone();
        let signals: Vec<SignalAgentSpec> = scenario
            .signal_agents
            .iter()
            .enumerate()
            .map(|(i, &node)| SignalAgentSpec {
                id: AgentId::sa(i),
                node,
                lanes: scenario.network.approach_lanes(node),
                phases: scenario.network.nodes[node].phases.len(),
            })
            .collect();
        let routers: Vec<RoutingAgentSpec> = scenario
            .routing_agents
            .iter()
            .enumerate()
            .map(|(i, p)| RoutingAgentSpec {
                id: AgentId::ra(i),
                placement: p.clone(),
                downstream: p
                    .downstream
                    .iter()
                    .map(|d| (d.edge, hyper.sigma.powi(d.hops as i32)))
                    .collect(),
            })
            .collect();
        let graph = build_relevance(scenario, hyper.delta);
        let mut set = AgentSet {
            signals,
            routers,
            graph,
            layouts: Vec::new(),
            hyper,
        };
        set.layouts = (0..set.len()).map(|g| ObservationLayout::new(&set, g)).collect();
        set
    }

    pub fn len(&self) -> usize {
        self.signals.len() + self.routers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Global index of an agent.
    pub fn global(&self, id: AgentId) -> usize {
        match id.kind {
            AgentKind::Signal => id.index,
            AgentKind::Routing => self.signals.len() + id.index,
        }
    }

    pub fn id(&self, g: usize) -> AgentId {
        if g < self.signals.len() {
            AgentId::sa(g)
        } else {
            AgentId::ra(g - self.signals.len())
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.len()).map(|g| self.id(g))
    }

    /// Size of an agent's action space.
    pub fn actions(&self, g: usize) -> usize {
        match self.id(g).kind {
            AgentKind::Signal => self.signals[g].phases,
            AgentKind::Routing => self.routers[g - self.signals.len()].routes(),
        }
    }

    /// Fingerprints at episode start: every policy uniform.
    pub fn uniform_fingerprints(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|g| {
                let n = self.actions(g);
                vec![1.0 / n as f64; n]
            })
            .collect()
    }

    /// Relevant agents whose fingerprints agent `g` observes, sorted.
    pub fn fingerprint_sources(&self, g: usize) -> Vec<AgentId> {
        let mut ids: Vec<AgentId> = match self.id(g).kind {
            AgentKind::Signal => self.graph.sa_ss[g]
                .iter()
                .map(|&j| AgentId::sa(j))
                .chain(self.graph.sa_sr[g].iter().map(|r| AgentId::ra(r.index)))
                .collect(),
            AgentKind::Routing => {
                let i = g - self.signals.len();
                self.graph.ra_rs[i]
                    .iter()
                    .map(|r| AgentId::sa(r.index))
                    .chain(self.graph.ra_rr[i].iter().map(|&j| AgentId::ra(j)))
                    .collect()
            }
        };
        ids.sort();
        ids
    }

    /// Composite observation of every agent from one measurement snapshot.
    pub fn observe_all(&self, m: &Measurements, fingerprints: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..self.len()).map(|g| self.observe(g, m, fingerprints)).collect()
    }
}
