//! The control-step environment around one simulator episode.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agents::{AgentKind, AgentSet, Measurements, RewardRecord};
use crate::netmodel::Scenario;
use crate::simcore::{SimError, SimOptions, SimState};

/// Which agents' decisions reach the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    /// Signal and routing agents both act.
    Joint,
    /// Signal agents act; vehicles keep their predefined routes.
    SignalOnly,
    /// Routing agents act; signals run the fixed-time plan.
    RoutingOnly,
    /// Fixed-time signals and predefined routes.
    FixedBoth,
}

impl ControlMode {
    pub fn signals_learned(self) -> bool {
        matches!(self, ControlMode::Joint | ControlMode::SignalOnly)
    }

    pub fn routes_learned(self) -> bool {
        matches!(self, ControlMode::Joint | ControlMode::RoutingOnly)
    }

    /// Whether agent `g`'s actions are applied under this mode.
    pub fn controls(self, set: &AgentSet, g: usize) -> bool {
        match set.id(g).kind {
            AgentKind::Signal => self.signals_learned(),
            AgentKind::Routing => self.routes_learned(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ControlMode::Joint => "joint",
            ControlMode::SignalOnly => "signal",
            ControlMode::RoutingOnly => "routing",
            ControlMode::FixedBoth => "fixed",
        }
    }
}

impl std::str::FromStr for ControlMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "joint" => Ok(ControlMode::Joint),
            "signal" | "signal_only" => Ok(ControlMode::SignalOnly),
            "routing" | "routing_only" => Ok(ControlMode::RoutingOnly),
            "fixed" | "fixed_both" => Ok(ControlMode::FixedBoth),
            other => Err(format!("unknown mode {other:?}; expected joint, signal, routing or fixed")),
        }
    }
}

impl std::fmt::Display for ControlMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Round-robin signal plan: each phase holds for `green_steps` control steps
/// after its transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedTimePlan {
    pub green_steps: usize,
    /// Control steps spent in the all-stop transition before each green.
    pub transition_steps: usize,
}

impl FixedTimePlan {
    /// 30 s of green per phase for the scenario's step and transition length.
    pub fn for_scenario(scenario: &Scenario) -> Self {
        let step = scenario.control_step_s.max(1) as usize;
        FixedTimePlan {
            green_steps: 30usize.div_ceil(step),
            transition_steps: (scenario.transition_s as usize).div_ceil(step),
        }
    }

    /// Control steps in one slot (transition plus green).
    pub fn slot_steps(&self) -> usize {
        self.green_steps + self.transition_steps
    }

    /// Phase to request at control step `step` for a node with `phases` phases.
    pub fn phase_at(&self, step: usize, phases: usize) -> usize {
        (step / self.slot_steps()) % phases
    }
}

/// What one control step produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub rewards: Vec<RewardRecord>,
    pub done: bool,
}

/// One episode seen at control-step granularity.
#[derive(Debug, Clone)]
pub struct Env {
    set: Arc<AgentSet>,
    sim: SimState,
    mode: ControlMode,
    plan: FixedTimePlan,
    step: usize,
    steps: usize,
    measurements: Measurements,
    fingerprints: Vec<Vec<f64>>,
}

impl Env {
    pub fn new(scenario: Arc<Scenario>, set: Arc<AgentSet>, options: SimOptions, mode: ControlMode) -> Self {
        let plan = FixedTimePlan::for_scenario(&scenario);
        let steps = scenario.control_steps();
        let mut sim = SimState::new(scenario, options);
        let measurements = Measurements::capture(&set, &sim);
        sim.begin_control_step();
        sim.sample_queues();
        let fingerprints = set.uniform_fingerprints();
        Env {
            set,
            sim,
            mode,
            plan,
            step: 0,
            steps,
            measurements,
            fingerprints,
        }
    }

    pub fn agents(&self) -> &Arc<AgentSet> {
        &self.set
    }

    pub fn sim(&self) -> &SimState {
        &self.sim
    }

    pub fn mode(&self) -> ControlMode {
        self.mode
    }

    /// Control steps taken so far.
    pub fn step_index(&self) -> usize {
        self.step
    }

    /// Control steps in a full episode.
    pub fn episode_steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.steps || self.sim.is_done()
    }

    pub fn measurements(&self) -> &Measurements {
        &self.measurements
    }

    pub fn fingerprints(&self) -> &[Vec<f64>] {
        &self.fingerprints
    }

    /// Every agent's observation at the current boundary.
    pub fn observe(&self) -> Vec<Vec<f64>> {
        self.set.observe_all(&self.measurements, &self.fingerprints)
    }

    /// Apply one action per agent (those the mode ignores are dropped), run
    /// one control step and score it. `policies` become the fingerprints
    /// seen at the next boundary.
    pub fn act(&mut self, actions: &[usize], policies: Vec<Vec<f64>>) -> Result<StepOutcome, SimError> {
        if self.is_done() {
            return Err(SimError::EpisodeOver { clock: self.sim.clock() });
        }
        let set = Arc::clone(&self.set);
        for sa in &set.signals {
            let phase = if self.mode.signals_learned() {
                actions[set.global(sa.id)]
            } else {
                self.plan.phase_at(self.step, sa.phases)
            };
            self.sim.set_phase(sa.node, phase)?;
        }
        if self.mode.routes_learned() {
            for ra in &set.routers {
                let choice = actions[set.global(ra.id)];
                self.sim.assign_route(&ra.placement, ra.placement.routes[choice])?;
            }
        }
        let ticks = self.sim.scenario().control_step_s;
        for _ in 0..ticks {
            if self.sim.is_done() {
                break;
            }
            self.sim.step()?;
        }
        self.step += 1;
        self.measurements = Measurements::capture(&set, &self.sim);
        let rewards = set.rewards(&self.measurements);
        self.sim.begin_control_step();
        if !self.is_done() {
            self.sim.sample_queues();
        }
        self.fingerprints = policies;
        Ok(StepOutcome {
            rewards,
            done: self.is_done(),
        })
    }
}
