//! Multi-agent advantage actor-critic training: every agent owns a policy
//! and a value network and learns from its own shared reward.

mod checkpoint;
mod env;
mod objective;
mod trainer;

pub use checkpoint::{AgentNets, AgentShape, Checkpoint, CheckpointMeta, CHECKPOINT_VERSION};
pub use env::{ControlMode, Env, FixedTimePlan, StepOutcome};
pub use objective::{advantages, episode_reward, policy_objective, td_targets, value_loss, value_loss_grad};
pub use trainer::{
    episode_seed, init_nets, train, EpisodeRecord, TrainConfig, TrainOutcome, TrainingCurve, UpdateStats,
};

use thiserror::Error;

use crate::agents::{AgentKind, AgentSet};
use crate::neuralcore::{HeadKind, NetSpec, NnError};
use crate::netmodel::ScenarioError;
use crate::simcore::SimError;

#[derive(Debug, Error)]
pub enum Maa2cError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("sequences differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite update for {agent} in episode {episode} at step {step}: {detail}")]
    NonFinite {
        agent: String,
        episode: usize,
        step: usize,
        detail: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: String, message: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint does not fit the scenario: {0}")]
    Topology(String),
    #[error("invalid training configuration: {0}")]
    Config(String),
}

/// Network shape of agent `g`, from its observation layout and the
/// scenario's hyperparameters.
pub fn net_spec(set: &AgentSet, g: usize, head: HeadKind) -> NetSpec {
    let h = &set.hyper;
    NetSpec {
        blocks: set.layouts[g].block_sizes(),
        fc: match set.id(g).kind {
            AgentKind::Signal => h.fc_sa,
            AgentKind::Routing => h.fc_ra,
        },
        hidden: h.lstm_units,
        outputs: match head {
            HeadKind::Policy => set.actions(g),
            HeadKind::Value => 1,
        },
        head,
    }
}
