//! One-second tick point-queue simulator.
//!
//! Vehicles traverse each edge at free-flow speed, then wait in a vertical
//! queue at the stop line of the lane that serves their next movement. A
//! green lane discharges at its saturation flow through a fractional
//! accumulator. Vehicles leave the network when they reach the end of an edge
//! that ends at an external node.
//!
//! Each tick runs, in order: edge traversal, spawning, discharge, waiting
//! counters, then the signal transition countdown.

mod events;

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{LaneRef, NodeKind, RaPlacement, Scenario};

pub use events::{write_event_log, SimEvent, SimEventKind};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("episode is over at t = {clock} s")]
    EpisodeOver { clock: u32 },
    #[error("node {node} is not signalised")]
    NotSignalized { node: String },
    #[error("node {node} has no phase {phase} (it has {count})")]
    UnknownPhase { node: String, phase: usize, count: usize },
    #[error("route {route} is not feasible for {ra}")]
    RouteNotFeasible { ra: String, route: usize },
}

/// Simulation knobs that do not belong to the scenario itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub seed: u64,
    /// Multiplies every OD pair's demand.
    pub demand_factor: f64,
    /// Probability that a new vehicle follows routing instructions.
    pub compliance: f64,
    /// Keep a per-tick event log.
    pub record_events: bool,
}

impl SimOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            demand_factor: 1.0,
            compliance: 1.0,
            record_events: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Travel {
    /// Free-flow traversal; reaches the stop line at `exit_tick`.
    Running { exit_tick: u32 },
    /// Waiting at the stop line since `since`.
    Queued { lane: usize, since: u32 },
    Arrived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: u32,
    pub od: usize,
    /// Index into the OD pair's route list.
    pub route: usize,
    pub compliant: bool,
    /// Position of the current edge in the route's edge list.
    pub pos: usize,
    pub travel: Travel,
    pub total_wait: u32,
    pub step_wait: u32,
    step_stamp: u32,
    pub spawn: u32,
    pub arrival: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalState {
    pub node: usize,
    pub active: usize,
    pub pending: usize,
    pub transition_left: u32,
}

/// What happened during one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TickSummary {
    pub spawned: u32,
    pub arrived: u32,
    pub discharged: u32,
}

/// Episode-level performance figures.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    /// Vehicles that entered the network.
    pub departed: u64,
    pub arrived: u64,
    /// Vehicles generated by demand but still held at their origin.
    pub waiting_to_enter: u64,
    pub avg_delay_s: f64,
    pub avg_speed_mps: f64,
    pub avg_queue_veh: f64,
    pub completion_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Accumulators {
    step_arrived: Vec<u32>,
    arrived: u64,
    delay_s: f64,
    distance_m: f64,
    travel_s: f64,
    queue_sum: f64,
    queue_samples: u64,
}

/// The mutable world of one episode.
#[derive(Debug, Clone)]
pub struct SimState {
    scenario: Arc<Scenario>,
    options: SimOptions,
    clock: u32,
    horizon: u32,
    spawn_rng: Vec<ChaCha8Rng>,
    comply_rng: Vec<ChaCha8Rng>,
    pending: Vec<u64>,
    vehicles: Vec<Vehicle>,
    running: Vec<VecDeque<u32>>,
    lane_offset: Vec<usize>,
    lane_ref: Vec<LaneRef>,
    lane_movements: Vec<Vec<usize>>,
    queues: Vec<VecDeque<u32>>,
    discharge_acc: Vec<f64>,
    lane_step_wait: Vec<u64>,
    signals: Vec<SignalState>,
    signal_of_node: Vec<Option<usize>>,
    green: Vec<bool>,
    step_stamp: u32,
    acc: Accumulators,
    last_discharges: Vec<(usize, u32)>,
    events: Option<Vec<SimEvent>>,
}

/// A fresh episode with default options.
pub fn init_sim(scenario: Arc<Scenario>, seed: u64) -> SimState {
    SimState::new(scenario, SimOptions::new(seed))
}

impl SimState {
    pub fn new(scenario: Arc<Scenario>, options: SimOptions) -> Self {
        let net = &scenario.network;
        let mut lane_offset = Vec::with_capacity(net.edges.len() + 1);
        let mut lane_ref = Vec::new();
        for e in &net.edges {
            lane_offset.push(lane_ref.len());
            for lane in 0..e.lanes as usize {
                lane_ref.push(LaneRef { edge: e.index, lane });
            }
        }
        lane_offset.push(lane_ref.len());
        let mut lane_movements = vec![Vec::new(); lane_ref.len()];
        for m in &net.movements {
            lane_movements[lane_offset[m.from_edge] + m.lane].push(m.index);
        }

        let mut signal_of_node = vec![None; net.nodes.len()];
        let signals: Vec<SignalState> = scenario
            .signal_agents
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                signal_of_node[v] = Some(k);
                SignalState {
                    node: v,
                    active: 0,
                    pending: 0,
                    transition_left: 0,
                }
            })
            .collect();

        let n_od = scenario.ods.len();
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(k);
            rng
        };
        let spawn_rng = (0..n_od as u64).map(|k| stream(2 * k)).collect();
        let comply_rng = (0..n_od as u64).map(|k| stream(2 * k + 1)).collect();

        let mut state = SimState {
            horizon: scenario.episode_s,
            clock: 0,
            spawn_rng,
            comply_rng,
            pending: vec![0; n_od],
            vehicles: Vec::new(),
            running: vec![VecDeque::new(); net.edges.len()],
            queues: vec![VecDeque::new(); lane_ref.len()],
            discharge_acc: vec![0.0; lane_ref.len()],
            lane_step_wait: vec![0; lane_ref.len()],
            lane_offset,
            lane_ref,
            lane_movements,
            signals,
            signal_of_node,
            green: vec![false; net.movements.len()],
            step_stamp: 0,
            acc: Accumulators {
                step_arrived: vec![0; n_od],
                arrived: 0,
                delay_s: 0.0,
                distance_m: 0.0,
                travel_s: 0.0,
                queue_sum: 0.0,
                queue_samples: 0,
            },
            last_discharges: Vec::new(),
            events: options.record_events.then(Vec::new),
            options,
            scenario,
        };
        state.refresh_green();
        state
    }

    pub fn scenario(&self) -> &Arc<Scenario> {
        &self.scenario
    }

    pub fn options(&self) -> &SimOptions {
        &self.options
    }

    pub fn clock(&self) -> u32 {
        self.clock
    }

    pub fn is_done(&self) -> bool {
        self.clock >= self.horizon
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn signals(&self) -> &[SignalState] {
        &self.signals
    }

    pub fn signal_at(&self, node: usize) -> Option<&SignalState> {
        self.signal_of_node[node].map(|k| &self.signals[k])
    }

    /// Movements discharged during the last tick, as `(movement, vehicle)`.
    pub fn last_discharges(&self) -> &[(usize, u32)] {
        &self.last_discharges
    }

    pub fn events(&self) -> Option<&[SimEvent]> {
        self.events.as_deref()
    }

    /// Whether a movement may discharge right now.
    pub fn is_green(&self, movement: usize) -> bool {
        self.green[movement]
    }

    fn lane_index(&self, lane: LaneRef) -> usize {
        self.lane_offset[lane.edge] + lane.lane
    }

    pub fn queue(&self, lane: LaneRef) -> &VecDeque<u32> {
        &self.queues[self.lane_index(lane)]
    }

    fn refresh_green(&mut self) {
        let net = &self.scenario.network;
        for m in &net.movements {
            self.green[m.index] = match net.nodes[m.node].kind {
                NodeKind::Priority => true,
                NodeKind::External => false,
                NodeKind::Signalized => {
                    let s = &self.signals[self.signal_of_node[m.node].expect("signal slot")];
                    s.transition_left == 0 && net.nodes[m.node].phases[s.active].permits(m.index)
                }
            };
        }
    }

    fn next_movement(&self, v: &Vehicle) -> Option<usize> {
        self.scenario.ods[v.od].routes[v.route].movements.get(v.pos).copied()
    }

    fn log(&mut self, kind: SimEventKind, vehicle: u32, edge: usize, node: usize) {
        if let Some(events) = &mut self.events {
            events.push(SimEvent {
                tick: self.clock,
                kind,
                vehicle,
                edge,
                node,
            });
        }
    }

    /// Advance the world by one second.
    pub fn step(&mut self) -> Result<TickSummary, SimError> {
        if self.is_done() {
            return Err(SimError::EpisodeOver { clock: self.clock });
        }
        let mut summary = TickSummary::default();
        self.last_discharges.clear();
        let scenario = Arc::clone(&self.scenario);
        let net = &scenario.network;

        // Vehicles reaching the end of their edge.
        for e in 0..net.edges.len() {
            while let Some(&id) = self.running[e].front() {
                let v = &self.vehicles[id as usize];
                match v.travel {
                    Travel::Running { exit_tick } if exit_tick <= self.clock => {}
                    _ => break,
                }
                self.running[e].pop_front();
                let end = net.edges[e].to;
                if net.nodes[end].kind == NodeKind::External {
                    self.arrive(id);
                    summary.arrived += 1;
                    self.log(SimEventKind::Arrive, id, e, end);
                } else {
                    let m = self.next_movement(&self.vehicles[id as usize]).expect("route continues past an interior node");
                    let lane = self.lane_offset[e] + net.movements[m].lane;
                    self.vehicles[id as usize].travel = Travel::Queued { lane, since: self.clock };
                    self.queues[lane].push_back(id);
                    self.log(SimEventKind::Enqueue, id, e, end);
                }
            }
        }

        // Demand generation and entry.
        let t = self.clock as f64;
        for (k, od) in scenario.ods.iter().enumerate() {
            let p = (scenario.demand_vph(k, t) * self.options.demand_factor / 3600.0).clamp(0.0, 1.0);
            let u: f64 = self.spawn_rng[k].gen();
            if u < p {
                self.pending[k] += 1;
            }
            let entry = od.routes[od.predefined].edges[0];
            let cap = net.edges[entry].jam_capacity();
            while self.pending[k] > 0 && self.edge_occupancy(entry) < cap {
                self.pending[k] -= 1;
                let c: f64 = self.comply_rng[k].gen();
                let id = self.vehicles.len() as u32;
                self.vehicles.push(Vehicle {
                    id,
                    od: k,
                    route: od.predefined,
                    compliant: c < self.options.compliance,
                    pos: 0,
                    travel: Travel::Running {
                        exit_tick: self.clock + net.edges[entry].free_flow_ticks(),
                    },
                    total_wait: 0,
                    step_wait: 0,
                    step_stamp: self.step_stamp,
                    spawn: self.clock,
                    arrival: None,
                });
                self.running[entry].push_back(id);
                summary.spawned += 1;
                self.log(SimEventKind::Spawn, id, entry, net.edges[entry].from);
            }
        }

        // Stop-line discharge.
        for lane in 0..self.queues.len() {
            let sat = net.edges[self.lane_ref[lane].edge].saturation_vps;
            let Some(&head) = self.queues[lane].front() else {
                let any_green = self.lane_movements[lane].iter().any(|&m| self.green[m]);
                self.discharge_acc[lane] = if any_green {
                    (self.discharge_acc[lane] + sat).min(1.0)
                } else {
                    0.0
                };
                continue;
            };
            let head_green = |s: &Self, id: u32| {
                let m = s.next_movement(&s.vehicles[id as usize]).expect("queued vehicles have a next movement");
                s.green[m]
            };
            if !head_green(self, head) {
                self.discharge_acc[lane] = 0.0;
                continue;
            }
            self.discharge_acc[lane] += sat;
            while self.discharge_acc[lane] >= 1.0 {
                let Some(&id) = self.queues[lane].front() else { break };
                if !head_green(self, id) {
                    break;
                }
                self.queues[lane].pop_front();
                self.discharge_acc[lane] -= 1.0;
                let m = self.next_movement(&self.vehicles[id as usize]).unwrap();
                let next = net.movements[m].to_edge;
                let v = &mut self.vehicles[id as usize];
                v.pos += 1;
                v.travel = Travel::Running {
                    exit_tick: self.clock + net.edges[next].free_flow_ticks(),
                };
                self.running[next].push_back(id);
                self.last_discharges.push((m, id));
                summary.discharged += 1;
                self.log(SimEventKind::Discharge, id, next, net.movements[m].node);
            }
            if self.queues[lane].is_empty() {
                self.discharge_acc[lane] = self.discharge_acc[lane].min(1.0);
            }
        }

        // Waiting counters.
        for lane in 0..self.queues.len() {
            let q = &self.queues[lane];
            self.lane_step_wait[lane] += q.len() as u64;
            for &id in q {
                let v = &mut self.vehicles[id as usize];
                if v.step_stamp != self.step_stamp {
                    v.step_stamp = self.step_stamp;
                    v.step_wait = 0;
                }
                v.total_wait += 1;
                v.step_wait += 1;
            }
        }

        // Signal transitions.
        let mut changed = false;
        for s in &mut self.signals {
            if s.transition_left > 0 {
                s.transition_left -= 1;
                if s.transition_left == 0 {
                    s.active = s.pending;
                    changed = true;
                }
            }
        }
        if changed {
            self.refresh_green();
        }

        self.clock += 1;
        Ok(summary)
    }

    fn arrive(&mut self, id: u32) {
        let scenario = &self.scenario;
        let v = &mut self.vehicles[id as usize];
        v.travel = Travel::Arrived;
        v.arrival = Some(self.clock);
        let route = &scenario.ods[v.od].routes[v.route];
        let travel = (self.clock - v.spawn) as f64;
        self.acc.arrived += 1;
        self.acc.step_arrived[v.od] += 1;
        self.acc.delay_s += travel - route.free_flow_ticks as f64;
        self.acc.distance_m += route.length_m;
        self.acc.travel_s += travel;
    }

    fn edge_occupancy(&self, edge: usize) -> usize {
        let lanes = self.lane_offset[edge]..self.lane_offset[edge + 1];
        self.running[edge].len() + lanes.map(|l| self.queues[l].len()).sum::<usize>()
    }

    /// Request a phase at a signalised node.
    ///
    /// Requesting the phase that is already active (or already pending during
    /// a transition) changes nothing. Any other request starts a fresh
    /// all-stop transition that ends with the requested phase.
    pub fn set_phase(&mut self, node: usize, phase: usize) -> Result<(), SimError> {
        let net = &self.scenario.network;
        let Some(k) = self.signal_of_node.get(node).copied().flatten() else {
            return Err(SimError::NotSignalized {
                node: net.nodes.get(node).map(|n| n.id.clone()).unwrap_or_else(|| node.to_string()),
            });
        };
        let count = net.nodes[node].phases.len();
        if phase >= count {
            return Err(SimError::UnknownPhase {
                node: net.nodes[node].id.clone(),
                phase,
                count,
            });
        }
        let s = &mut self.signals[k];
        let in_transition = s.transition_left > 0;
        if (!in_transition && phase == s.active) || (in_transition && phase == s.pending) {
            return Ok(());
        }
        s.pending = phase;
        s.transition_left = self.scenario.transition_s;
        if s.transition_left == 0 {
            s.active = phase;
        }
        self.refresh_green();
        Ok(())
    }

    /// Queued plus approaching vehicles for one approach lane.
    pub fn measure_wave(&self, lane: LaneRef) -> usize {
        let net = &self.scenario.network;
        let approaching = self.running[lane.edge]
            .iter()
            .filter(|&&id| {
                let v = &self.vehicles[id as usize];
                self.next_movement(v).is_some_and(|m| net.movements[m].lane == lane.lane)
            })
            .count();
        self.queue(lane).len() + approaching
    }

    /// Vehicle-seconds of waiting in a lane since the current control step began.
    pub fn measure_wait(&self, lane: LaneRef) -> u64 {
        self.lane_step_wait[self.lane_index(lane)]
    }

    /// Seconds since the head vehicle of a lane stopped; 0 for an empty lane.
    pub fn measure_first_wait(&self, lane: LaneRef) -> u32 {
        match self.queue(lane).front() {
            Some(&id) => match self.vehicles[id as usize].travel {
                Travel::Queued { since, .. } => self.clock - since,
                _ => unreachable!("queued vehicles are marked queued"),
            },
            None => 0,
        }
    }

    fn is_candidate(&self, ra: &RaPlacement, v: &Vehicle) -> bool {
        v.od == ra.od && v.pos == ra.upstream_pos() && ra.routes.contains(&v.route)
    }

    /// Running vehicles on a routing agent's upstream edge that can still be
    /// sent down any of its routes.
    pub fn count_arrival_candidates(&self, ra: &RaPlacement) -> usize {
        self.running[ra.upstream_edge]
            .iter()
            .filter(|&&id| self.is_candidate(ra, &self.vehicles[id as usize]))
            .count()
    }

    /// Running and queued vehicles on an edge.
    pub fn count_downstream(&self, edge: usize) -> usize {
        self.edge_occupancy(edge)
    }

    /// Send every compliant arrival candidate down `route`; returns how many
    /// vehicles were assigned.
    pub fn assign_route(&mut self, ra: &RaPlacement, route: usize) -> Result<usize, SimError> {
        if !ra.routes.contains(&route) {
            return Err(SimError::RouteNotFeasible {
                ra: ra.name.clone(),
                route,
            });
        }
        let mut n = 0;
        for i in 0..self.running[ra.upstream_edge].len() {
            let id = self.running[ra.upstream_edge][i] as usize;
            if self.is_candidate(ra, &self.vehicles[id]) && self.vehicles[id].compliant {
                self.vehicles[id].route = route;
                n += 1;
            }
        }
        Ok(n)
    }

    /// Arrivals of one OD pair since the current control step began.
    pub fn arrived_count(&self, od: usize) -> u32 {
        self.acc.step_arrived[od]
    }

    /// Reset the per-control-step accumulators.
    pub fn begin_control_step(&mut self) {
        self.lane_step_wait.iter_mut().for_each(|w| *w = 0);
        self.acc.step_arrived.iter_mut().for_each(|a| *a = 0);
        self.step_stamp += 1;
    }

    /// Add one queue-length sample per signalised approach.
    pub fn sample_queues(&mut self) {
        let net = &self.scenario.network;
        for &v in &self.scenario.signal_agents {
            for &e in &net.nodes[v].inbound {
                let lanes = self.lane_offset[e]..self.lane_offset[e + 1];
                self.acc.queue_sum += lanes.map(|l| self.queues[l].len()).sum::<usize>() as f64;
                self.acc.queue_samples += 1;
            }
        }
    }

    pub fn departed(&self) -> u64 {
        self.vehicles.len() as u64
    }

    pub fn arrived(&self) -> u64 {
        self.acc.arrived
    }

    /// Vehicles currently held in edge or queue containers.
    pub fn in_network(&self) -> u64 {
        let running: usize = self.running.iter().map(VecDeque::len).sum();
        let queued: usize = self.queues.iter().map(VecDeque::len).sum();
        (running + queued) as u64
    }

    /// Every vehicle that entered is either in the network or has arrived.
    pub fn conservation_check(&self) -> bool {
        self.departed() == self.in_network() + self.arrived()
    }

    /// Remove one running vehicle without recording an arrival.
    #[doc(hidden)]
    pub fn inject_vehicle_loss(&mut self) -> bool {
        self.running.iter_mut().any(|r| r.pop_front().is_some())
    }

    pub fn metrics(&self) -> EpisodeMetrics {
        let a = &self.acc;
        let departed = self.departed();
        EpisodeMetrics {
            departed,
            arrived: a.arrived,
            waiting_to_enter: self.pending.iter().sum(),
            avg_delay_s: if a.arrived > 0 { a.delay_s / a.arrived as f64 } else { 0.0 },
            avg_speed_mps: if a.travel_s > 0.0 { a.distance_m / a.travel_s } else { 0.0 },
            avg_queue_veh: if a.queue_samples > 0 {
                a.queue_sum / a.queue_samples as f64
            } else {
                0.0
            },
            completion_rate: if departed > 0 { a.arrived as f64 / departed as f64 } else { 1.0 },
        }
    }
}
