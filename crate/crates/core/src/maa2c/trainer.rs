//! Batch collection, per-agent updates, checkpoints and the training curve.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::{AgentNets, AgentShape, Checkpoint, CheckpointMeta, CHECKPOINT_VERSION};
use super::objective::{advantages, policy_objective, td_targets, value_loss, value_loss_grad};
use super::{net_spec, ControlMode, Env, Maa2cError};
use crate::agents::{AgentKind, AgentSet};
use crate::neuralcore::{
    adam_step, clip_grad_norm, entropy, sample_action, softmax, AgentNet, HeadKind, LstmState, OptimizerConfig,
    StepCache,
};
use crate::netmodel::{Hyperparameters, Scenario};
use crate::simcore::SimOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub gamma: f64,
    /// Control steps per update batch.
    pub batch_steps: usize,
    pub entropy_sa: f64,
    pub entropy_ra: f64,
    pub optimizer: OptimizerConfig,
    /// Training stops after this many control steps.
    pub total_steps: usize,
    pub seed: u64,
    pub mode: ControlMode,
    /// Write `ckpt_ep{N}` after every this many episodes; 0 disables.
    pub checkpoint_every: usize,
    /// Where checkpoints and the curve go; nothing is written when unset.
    pub out_dir: Option<PathBuf>,
}

impl TrainConfig {
    pub fn new(hyper: &Hyperparameters, seed: u64) -> Self {
        TrainConfig {
            gamma: hyper.gamma,
            batch_steps: hyper.batch_steps,
            entropy_sa: hyper.entropy_sa,
            entropy_ra: hyper.entropy_ra,
            optimizer: OptimizerConfig {
                learning_rate: hyper.learning_rate,
                beta1: hyper.adam_beta1,
                beta2: hyper.adam_beta2,
                eps: hyper.adam_eps,
                max_grad_norm: hyper.grad_clip,
            },
            total_steps: hyper.total_control_steps,
            seed,
            mode: ControlMode::Joint,
            checkpoint_every: 50,
            out_dir: None,
        }
    }
}

/// Simulator seed of one training episode.
pub fn episode_seed(seed: u64, episode: usize) -> u64 {
    seed ^ (episode as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Fresh networks for every agent, deterministic per seed.
pub fn init_nets(set: &AgentSet, seed: u64) -> Vec<AgentNets> {
    (0..set.len())
        .map(|g| {
            let base = seed.wrapping_mul(1_000_003).wrapping_add(2 * g as u64);
            AgentNets {
                policy: AgentNet::init(net_spec(set, g, HeadKind::Policy), base),
                value: AgentNet::init(net_spec(set, g, HeadKind::Value), base + 1),
            }
        })
        .collect()
}

/// One completed training episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    /// Sum over steps and agents of normalised local rewards.
    pub total_reward: f64,
    pub arrived: u64,
    pub avg_delay_s: f64,
    pub agent_rewards: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingCurve {
    pub agents: Vec<String>,
    pub episodes: Vec<EpisodeRecord>,
}

impl TrainingCurve {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["episode", "total_reward", "arrived", "avg_delay_s"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend(self.agents.iter().cloned());
        h
    }

    fn row(r: &EpisodeRecord) -> Vec<String> {
        let mut row = vec![
            r.episode.to_string(),
            r.total_reward.to_string(),
            r.arrived.to_string(),
            r.avg_delay_s.to_string(),
        ];
        row.extend(r.agent_rewards.iter().map(f64::to_string));
        row
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), Maa2cError> {
        let path = path.as_ref();
        let mut w = CurveWriter::create(path, self)?;
        for r in &self.episodes {
            w.append(r)?;
        }
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, Maa2cError> {
        let path = path.as_ref();
        let io = |e: csv::Error| Maa2cError::Csv {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut r = csv::Reader::from_path(path).map_err(io)?;
        let agents: Vec<String> = r.headers().map_err(io)?.iter().skip(4).map(str::to_string).collect();
        let mut episodes = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(io)?;
            let num = |k: usize| -> Result<f64, Maa2cError> {
                rec.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| Maa2cError::Csv {
                    path: path.display().to_string(),
                    message: format!("bad value in column {k}"),
                })
            };
            episodes.push(EpisodeRecord {
                episode: num(0)? as usize,
                total_reward: num(1)?,
                arrived: num(2)? as u64,
                avg_delay_s: num(3)?,
                agent_rewards: (4..rec.len()).map(num).collect::<Result<_, _>>()?,
            });
        }
        Ok(TrainingCurve { agents, episodes })
    }

    /// Mean total reward over `range` of the recorded episodes.
    pub fn mean_reward(&self, range: std::ops::Range<usize>) -> f64 {
        let slice = &self.episodes[range];
        slice.iter().map(|r| r.total_reward).sum::<f64>() / slice.len() as f64
    }
}

/// Appends curve rows to disk as episodes finish.
struct CurveWriter {
    inner: csv::Writer<File>,
    path: String,
}

impl CurveWriter {
    fn create(path: &Path, curve: &TrainingCurve) -> Result<Self, Maa2cError> {
        let p = path.display().to_string();
        let mut inner = csv::Writer::from_path(path).map_err(|e| Maa2cError::Csv {
            path: p.clone(),
            message: e.to_string(),
        })?;
        inner.write_record(curve.header()).map_err(|e| Maa2cError::Csv {
            path: p.clone(),
            message: e.to_string(),
        })?;
        let mut w = CurveWriter { inner, path: p };
        w.flush()?;
        Ok(w)
    }

    fn append(&mut self, r: &EpisodeRecord) -> Result<(), Maa2cError> {
        self.inner.write_record(TrainingCurve::row(r)).map_err(|e| Maa2cError::Csv {
            path: self.path.clone(),
            message: e.to_string(),
        })?;
        self.flush()
    }

    fn flush(&mut self) -> Result<(), Maa2cError> {
        self.inner.flush().map_err(|source| Maa2cError::Io {
            path: self.path.clone(),
            source,
        })
    }
}

/// One agent's transitions since the last update.
#[derive(Debug, Clone)]
struct AgentBatch {
    obs: Vec<Vec<f64>>,
    caches: Vec<StepCache>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
    value_start: LstmState,
}

impl AgentBatch {
    fn new(value_start: LstmState) -> Self {
        AgentBatch {
            obs: Vec::new(),
            caches: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            value_start,
        }
    }
}

/// Diagnostics of one agent update.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct UpdateStats {
    pub value_loss: f64,
    pub policy_objective: f64,
    pub mean_entropy: f64,
    pub value_grad_norm: f64,
    pub policy_grad_norm: f64,
}

impl UpdateStats {
    fn finite(&self) -> bool {
        [
            self.value_loss,
            self.policy_objective,
            self.value_grad_norm,
            self.policy_grad_norm,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

fn apply_gradients(net: &mut AgentNet, cfg: &OptimizerConfig) -> f64 {
    let mut params = net.params_mut();
    let norm = clip_grad_norm(&mut params, cfg.max_grad_norm);
    for p in params {
        adam_step(p, cfg);
    }
    norm
}

/// Update one agent from its batch. Returns the statistics and the value
/// net's state after the batch.
fn update_agent(
    nets: &mut AgentNets,
    batch: &AgentBatch,
    next_obs: &[f64],
    terminal: bool,
    cfg: &TrainConfig,
    beta: f64,
    learn: bool,
) -> Result<(UpdateStats, LstmState), Maa2cError> {
    let (outs, value_end, value_caches) = nets.value.forward_sequence(&batch.obs, &batch.value_start)?;
    let values: Vec<f64> = outs.iter().map(|o| o[0]).collect();
    let bootstrap = if terminal {
        0.0
    } else {
        nets.value.forward_value(next_obs, &value_end)?.0
    };
    let returns = td_targets(&batch.rewards, bootstrap, cfg.gamma);
    let adv = advantages(&returns, &values)?;
    let logits: Vec<&[f64]> = batch.caches.iter().map(|c| c.out.as_slice()).collect();
    let (objective, d_logits) = policy_objective(&logits, &batch.actions, &adv, beta);
    let mut stats = UpdateStats {
        value_loss: value_loss(&returns, &values),
        policy_objective: objective,
        mean_entropy: logits.iter().map(|z| entropy(&softmax(z))).sum::<f64>() / logits.len() as f64,
        ..Default::default()
    };
    if learn {
        nets.value.zero_grad();
        nets.value.backward(&value_caches, &value_loss_grad(&returns, &values))?;
        nets.policy.zero_grad();
        nets.policy.backward(&batch.caches, &d_logits)?;
        stats.value_grad_norm = crate::neuralcore::grad_norm(nets.value.params());
        stats.policy_grad_norm = crate::neuralcore::grad_norm(nets.policy.params());
        if stats.finite() {
            apply_gradients(&mut nets.value, &cfg.optimizer);
            apply_gradients(&mut nets.policy, &cfg.optimizer);
        }
    }
    Ok((stats, value_end))
}

/// What [`train`] produced.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub curve: TrainingCurve,
    /// Control steps executed.
    pub steps: usize,
    /// Length of every update batch in order.
    pub batch_lengths: Vec<usize>,
}

/// Non-finite update diagnostics written next to the checkpoints.
#[derive(Debug, Serialize)]
struct NonFiniteDump<'a> {
    episode: usize,
    step: usize,
    agent: String,
    stats: UpdateStats,
    observations: &'a [Vec<f64>],
    rewards: &'a [f64],
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Maa2cError + '_ {
    move |source| Maa2cError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Train every agent's networks on `scenario`.
pub fn train(scenario: Arc<Scenario>, cfg: &TrainConfig) -> Result<TrainOutcome, Maa2cError> {
    if cfg.batch_steps == 0 {
        return Err(Maa2cError::Config("batch_steps must be positive".into()));
    }
    let set = Arc::new(AgentSet::new(&scenario));
    let mut nets = init_nets(&set, cfg.seed);
    let names: Vec<String> = set.ids().map(|id| id.to_string()).collect();
    let mut curve = TrainingCurve {
        agents: names.clone(),
        episodes: Vec::new(),
    };
    let mut writer = match &cfg.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            Some(CurveWriter::create(&dir.join("curve.csv"), &curve)?)
        }
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let n = set.len();
    let betas: Vec<f64> = (0..n)
        .map(|g| match set.id(g).kind {
            AgentKind::Signal => cfg.entropy_sa,
            AgentKind::Routing => cfg.entropy_ra,
        })
        .collect();
    let learn: Vec<bool> = (0..n).map(|g| cfg.mode.controls(&set, g)).collect();

    let make_checkpoint = |nets: &[AgentNets], episodes: usize, steps: usize| Checkpoint {
        meta: CheckpointMeta {
            version: CHECKPOINT_VERSION,
            scenario_name: scenario.name.clone(),
            scenario_source: scenario.source.clone(),
            mode: cfg.mode,
            seed: cfg.seed,
            episodes,
            control_steps: steps,
            agents: (0..n)
                .map(|g| AgentShape {
                    name: names[g].clone(),
                    policy: nets[g].policy.spec.clone(),
                    value: nets[g].value.spec.clone(),
                })
                .collect(),
        },
        nets: nets
            .iter()
            .map(|a| {
                let mut a = a.clone();
                a.policy.zero_grad();
                a.value.zero_grad();
                a
            })
            .collect(),
    };

    let mut steps = 0;
    let mut episode = 0;
    let mut batch_lengths = Vec::new();
    while steps < cfg.total_steps {
        let options = SimOptions::new(episode_seed(cfg.seed, episode));
        let mut env = Env::new(Arc::clone(&scenario), Arc::clone(&set), options, cfg.mode);
        let mut policy_state: Vec<LstmState> = nets.iter().map(|a| a.policy.initial_state()).collect();
        let mut batches: Vec<AgentBatch> = nets.iter().map(|a| AgentBatch::new(a.value.initial_state())).collect();
        let mut local_sum = vec![0.0; n];
        let mut obs = env.observe();
        loop {
            let mut actions = Vec::with_capacity(n);
            let mut policies = Vec::with_capacity(n);
            for g in 0..n {
                let (probs, next, cache) = nets[g].policy.forward_policy(&obs[g], &policy_state[g])?;
                let a = sample_action(&probs, &mut rng);
                policy_state[g] = next;
                batches[g].obs.push(std::mem::take(&mut obs[g]));
                batches[g].caches.push(cache);
                batches[g].actions.push(a);
                actions.push(a);
                policies.push(probs);
            }
            let out = env.act(&actions, policies)?;
            steps += 1;
            for g in 0..n {
                batches[g].rewards.push(out.rewards[g].shared);
                local_sum[g] += out.rewards[g].local;
            }
            obs = env.observe();
            let stop = steps >= cfg.total_steps;
            if batches[0].rewards.len() >= cfg.batch_steps || out.done || stop {
                batch_lengths.push(batches[0].rewards.len());
                let results: Vec<Result<(UpdateStats, LstmState), Maa2cError>> = nets
                    .par_iter_mut()
                    .zip(batches.par_iter())
                    .enumerate()
                    .map(|(g, (agent, batch))| update_agent(agent, batch, &obs[g], out.done, cfg, betas[g], learn[g]))
                    .collect();
                let mut next_batches = Vec::with_capacity(n);
                for (g, r) in results.into_iter().enumerate() {
                    let (stats, value_end) = r?;
                    if !stats.finite() {
                        let dump = NonFiniteDump {
                            episode,
                            step: env.step_index(),
                            agent: names[g].clone(),
                            stats,
                            observations: &batches[g].obs,
                            rewards: &batches[g].rewards,
                        };
                        let text = serde_json::to_string_pretty(&dump).unwrap_or_default();
                        if let Some(dir) = &cfg.out_dir {
                            let path = dir.join("nonfinite_dump.json");
                            std::fs::write(&path, &text).map_err(io_err(&path))?;
                        }
                        return Err(Maa2cError::NonFinite {
                            agent: names[g].clone(),
                            episode,
                            step: env.step_index(),
                            detail: format!("{stats:?}"),
                        });
                    }
                    next_batches.push(AgentBatch::new(value_end));
                }
                batches = next_batches;
            }
            if out.done || stop {
                break;
            }
        }
        if env.is_done() {
            let metrics = env.sim().metrics();
            let record = EpisodeRecord {
                episode,
                total_reward: local_sum.iter().sum(),
                arrived: metrics.arrived,
                avg_delay_s: metrics.avg_delay_s,
                agent_rewards: local_sum,
            };
            if let Some(w) = &mut writer {
                w.append(&record)?;
            }
            curve.episodes.push(record);
            episode += 1;
            if let Some(dir) = &cfg.out_dir {
                if cfg.checkpoint_every > 0 && episode % cfg.checkpoint_every == 0 {
                    make_checkpoint(&nets, episode, steps).save(dir.join(format!("ckpt_ep{episode}")))?;
                }
            }
        }
    }
    let checkpoint = make_checkpoint(&nets, episode, steps);
    if let Some(dir) = &cfg.out_dir {
        checkpoint.save(dir.join("ckpt_final"))?;
    }
    Ok(TrainOutcome {
        checkpoint,
        curve,
        steps,
        batch_lengths,
    })
}
