//! Raw measurement snapshots and composite observations.

use std::ops::Range;

use serde::Serialize;

use super::{AgentKind, AgentSet};
use crate::simcore::SimState;

/// Raw (unnormalised) measurements taken at one control-step boundary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Measurements {
    /// Per signal agent, per approach lane: queued plus approaching vehicles.
    pub sa_wave: Vec<Vec<f64>>,
    /// Per signal agent, per lane: vehicle-seconds waited during the step.
    pub sa_wait: Vec<Vec<f64>>,
    /// Per signal agent, per lane: seconds since the head vehicle stopped.
    pub sa_first_wait: Vec<Vec<f64>>,
    /// Per routing agent: vehicles still open to a route decision.
    pub ra_arrival: Vec<f64>,
    /// Per routing agent, per downstream edge: vehicle count.
    pub ra_down: Vec<Vec<f64>>,
    /// Per OD pair: arrivals during the step.
    pub od_arrived: Vec<f64>,
}

impl Measurements {
    /// Snapshot the simulator. Call before resetting the step accumulators.
    pub fn capture(set: &AgentSet, sim: &SimState) -> Self {
        let per_lane = |f: &dyn Fn(crate::netmodel::LaneRef) -> f64| -> Vec<Vec<f64>> {
            set.signals.iter().map(|s| s.lanes.iter().map(|&l| f(l)).collect()).collect()
        };
        Measurements {
            sa_wave: per_lane(&|l| sim.measure_wave(l) as f64),
            sa_wait: per_lane(&|l| sim.measure_wait(l) as f64),
            sa_first_wait: per_lane(&|l| sim.measure_first_wait(l) as f64),
            ra_arrival: set
                .routers
                .iter()
                .map(|r| sim.count_arrival_candidates(&r.placement) as f64)
                .collect(),
            ra_down: set
                .routers
                .iter()
                .map(|r| r.downstream.iter().map(|&(e, _)| sim.count_downstream(e) as f64).collect())
                .collect(),
            od_arrived: (0..sim.scenario().ods.len()).map(|od| sim.arrived_count(od) as f64).collect(),
        }
    }
}

/// Where each input block sits in an agent's observation vector.
///
/// Block 0 is the agent's own primary state (lane waves, or arrivals for a
/// routing agent), block 1 its own secondary state (lane waits, or weighted
/// downstream counts), block 2 the relevant agents' states and block 3 their
/// fingerprints. Each block feeds its own front-end layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationLayout {
    pub blocks: [Range<usize>; 4],
}

impl ObservationLayout {
    pub(super) fn new(set: &AgentSet, g: usize) -> Self {
        let g_ = &set.graph;
        let (own1, own2, relevant) = match set.id(g).kind {
            AgentKind::Signal => {
                let lanes = set.signals[g].lanes.len();
                let rel_sa: usize = g_.sa_ss[g].iter().map(|&j| set.signals[j].lanes.len()).sum();
                (lanes, lanes, rel_sa + g_.sa_sr[g].len())
            }
            AgentKind::Routing => {
                let i = g - set.signals.len();
                let rel_sa: usize = g_.ra_rs[i].iter().map(|r| set.signals[r.index].lanes.len()).sum();
                (1, set.routers[i].downstream.len(), g_.ra_rr[i].len() + rel_sa)
            }
        };
        let fp: usize = set.fingerprint_sources(g).iter().map(|&id| set.actions(set.global(id))).sum();
        let a = own1;
        let b = a + own2;
        let c = b + relevant;
        let d = c + fp;
        ObservationLayout {
            blocks: [0..a, a..b, b..c, c..d],
        }
    }

    pub fn dim(&self) -> usize {
        self.blocks[3].end
    }

    pub fn block_sizes(&self) -> [usize; 4] {
        self.blocks.clone().map(|r| r.len())
    }
}

impl AgentSet {
    pub(crate) fn norm(&self, x: f64, factor: f64) -> f64 {
        let [lo, hi] = self.hyper.state_clip;
        (x / factor).clamp(lo, hi)
    }

    /// Composite observation of agent `g`: own state, relevant agents'
    /// states, then relevant agents' fingerprints.
    pub fn observe(&self, g: usize, m: &Measurements, fingerprints: &[Vec<f64>]) -> Vec<f64> {
        let h = &self.hyper;
        let layout = &self.layouts[g];
        let mut out = Vec::with_capacity(layout.dim());
        match self.id(g).kind {
            AgentKind::Signal => {
                out.extend(m.sa_wave[g].iter().map(|&x| self.norm(x, h.norm_wave)));
                out.extend(m.sa_wait[g].iter().map(|&x| self.norm(x, h.norm_wait)));
                for &j in &self.graph.sa_ss[g] {
                    out.extend(m.sa_wave[j].iter().map(|&x| self.norm(x, h.norm_wave)));
                }
                for r in &self.graph.sa_sr[g] {
                    out.push(self.norm(m.ra_arrival[r.index], h.norm_arrival));
                }
            }
            AgentKind::Routing => {
                let i = g - self.signals.len();
                out.push(self.norm(m.ra_arrival[i], h.norm_arrival));
                for (&count, &(_, alpha)) in m.ra_down[i].iter().zip(&self.routers[i].downstream) {
                    out.push(self.norm(alpha * count, h.norm_down));
                }
                for &j in &self.graph.ra_rr[i] {
                    out.push(self.norm(m.ra_arrival[j], h.norm_arrival));
                }
                for r in &self.graph.ra_rs[i] {
                    out.extend(m.sa_wave[r.index].iter().map(|&x| self.norm(x, h.norm_wave)));
                }
            }
        }
        for id in self.fingerprint_sources(g) {
            out.extend_from_slice(&fingerprints[self.global(id)]);
        }
        assert_eq!(
            out.len(),
            layout.dim(),
            "observation of {} does not match its layout; agent topology changed",
            self.id(g)
        );
        out
    }
}

/// Per-agent debug record for one control step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDump {
    pub step: usize,
    pub agent: String,
    pub observation: Vec<f64>,
    pub action: usize,
    pub local_raw: f64,
    pub shared_raw: f64,
    pub local: f64,
    pub shared: f64,
}
