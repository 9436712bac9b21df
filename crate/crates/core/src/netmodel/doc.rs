//! On-disk scenario schema.
//!
//! A scenario is a single TOML document with six sections: `[network]`,
//! `[phases]`, `[demand]`, `[profiles]`, `[agents]` and `[hyperparameters]`.
//! Every table rejects unknown keys so that typos fail loudly instead of
//! silently falling back to a default.

use serde::{Deserialize, Serialize};

use super::ScenarioError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub network: NetworkSection,
    #[serde(default)]
    pub phases: PhasesSection,
    pub demand: DemandSection,
    pub profiles: ProfilesSection,
    pub agents: AgentsSection,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub name: String,
    #[serde(default = "default_length")]
    pub default_length_m: f64,
    #[serde(default = "default_lanes")]
    pub default_lanes: u32,
    #[serde(default = "default_free_flow")]
    pub default_free_flow_mps: f64,
    #[serde(default = "default_saturation")]
    pub default_saturation_vps: f64,
    pub nodes: Vec<NodeDoc>,
    pub roads: Vec<RoadDoc>,
}

fn default_length() -> f64 {
    300.0
}
fn default_lanes() -> u32 {
    2
}
fn default_free_flow() -> f64 {
    13.9
}
fn default_saturation() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKindDoc {
    Signalized,
    Priority,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub kind: NodeKindDoc,
    pub x: f64,
    pub y: f64,
}

/// A road between two nodes. Two-way roads expand into two directed edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadDoc {
    pub from: String,
    pub to: String,
    #[serde(default = "yes")]
    pub two_way: bool,
    pub length_m: Option<f64>,
    pub lanes: Option<u32>,
    pub free_flow_mps: Option<f64>,
    pub saturation_vps: Option<f64>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasesSection {
    #[serde(default = "default_transition")]
    pub transition_s: u32,
    /// Explicit phase tables replacing the geometric default for a node.
    /// Each phase is a list of movements written `"from>via>to"`.
    #[serde(default)]
    pub overrides: Vec<PhaseOverrideDoc>,
}

impl Default for PhasesSection {
    fn default() -> Self {
        Self {
            transition_s: default_transition(),
            overrides: Vec::new(),
        }
    }
}

fn default_transition() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseOverrideDoc {
    pub node: String,
    pub phases: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSection {
    /// Regression guard: when present, the sum of all peak flows must match.
    pub expected_total_peak_vph: Option<f64>,
    #[serde(default)]
    pub od: Vec<OdDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdDoc {
    pub origin: String,
    pub destination: String,
    pub peak_vph: f64,
    pub profile: u32,
    /// Node lists such as `"1 3 4 5"`.
    pub routes: Vec<String>,
    /// Routing-agent names expected at this pair's fork points, upstream first.
    #[serde(default)]
    pub ras: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesSection {
    pub profile: Vec<ProfileDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDoc {
    #[serde(rename = "type")]
    pub kind: u32,
    #[serde(default)]
    pub description: String,
    /// `(time_s, ratio)` breakpoints, linearly interpolated.
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsSection {
    pub episode_s: u32,
    pub control_step_s: u32,
    pub expected_signal_agents: Option<usize>,
    pub expected_routing_agents: Option<usize>,
}

/// Training, normalisation and reward-sharing constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparameters {
    pub batch_steps: usize,
    pub gamma: f64,
    pub entropy_sa: f64,
    pub entropy_ra: f64,
    pub grad_clip: f64,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub lstm_units: usize,
    pub fc_sa: [usize; 4],
    pub fc_ra: [usize; 4],
    pub state_clip: [f64; 2],
    pub norm_wave: f64,
    pub norm_wait: f64,
    pub norm_arrival: f64,
    pub norm_down: f64,
    pub reward_clip: [f64; 2],
    pub norm_reward_sa: f64,
    pub norm_reward_ra: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta_ss: f64,
    pub beta_sr: f64,
    pub beta_rs: f64,
    pub delta: f64,
    pub sigma: f64,
    pub total_control_steps: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            batch_steps: 144,
            gamma: 0.99,
            entropy_sa: 0.05,
            entropy_ra: 0.01,
            grad_clip: 30.0,
            learning_rate: 2.5e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            lstm_units: 128,
            fc_sa: [140, 60, 50, 70],
            fc_ra: [20, 70, 200, 50],
            state_clip: [0.0, 2.0],
            norm_wave: 2.0,
            norm_wait: 8.0,
            norm_arrival: 16.0,
            norm_down: 7.0,
            reward_clip: [-6.0, 6.0],
            norm_reward_sa: 400.0,
            norm_reward_ra: 100.0,
            alpha1: 1.0,
            alpha2: 1000.0,
            beta_ss: 0.3,
            beta_sr: 0.3,
            beta_rs: 0.1,
            delta: 0.5,
            sigma: 0.5,
            total_control_steps: 500_000,
        }
    }
}

impl ScenarioDoc {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            ScenarioError::Parse {
                line,
                message: e.message().to_string(),
            }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario documents always serialise")
    }
}
