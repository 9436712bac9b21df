//! Greedy evaluation of trained agents, the fixed-time and predefined-route
//! baselines, compliance and demand sweeps, and plot-data files.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentSet, StepDump};
use crate::maa2c::{episode_seed, AgentNets, Checkpoint, ControlMode, Env, Maa2cError};
use crate::neuralcore::{argmax, LstmState};
use crate::netmodel::{OdPair, Route, Scenario};
use crate::simcore::{EpisodeMetrics, SimOptions};

pub use crate::maa2c::FixedTimePlan;

/// Evaluation episodes use simulator seeds disjoint from training's.
const EVAL_EPISODE_OFFSET: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub mode: ControlMode,
    pub episodes: usize,
    pub compliance: f64,
    pub demand_factor: f64,
    pub seed: u64,
}

impl EvalConfig {
    pub fn new(mode: ControlMode, seed: u64) -> Self {
        EvalConfig {
            mode,
            episodes: 10,
            compliance: 1.0,
            demand_factor: 1.0,
            seed,
        }
    }

    fn options(&self, episode: usize) -> SimOptions {
        SimOptions {
            demand_factor: self.demand_factor,
            compliance: self.compliance,
            ..SimOptions::new(episode_seed(self.seed, EVAL_EPISODE_OFFSET + episode))
        }
    }
}

/// Means over the evaluated episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub departed: f64,
    pub arrived: f64,
    pub avg_delay_s: f64,
    pub avg_speed_mps: f64,
    pub avg_queue_veh: f64,
    pub completion_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scenario: String,
    pub mode: ControlMode,
    pub compliance: f64,
    pub demand_factor: f64,
    pub seed: u64,
    pub episodes: Vec<EpisodeMetrics>,
    pub aggregate: Aggregate,
}

impl EvalReport {
    fn new(scenario: &Scenario, cfg: &EvalConfig, episodes: Vec<EpisodeMetrics>) -> Self {
        let n = episodes.len().max(1) as f64;
        let mean = |f: &dyn Fn(&EpisodeMetrics) -> f64| episodes.iter().map(f).sum::<f64>() / n;
        let aggregate = Aggregate {
            departed: mean(&|m| m.departed as f64),
            arrived: mean(&|m| m.arrived as f64),
            avg_delay_s: mean(&|m| m.avg_delay_s),
            avg_speed_mps: mean(&|m| m.avg_speed_mps),
            avg_queue_veh: mean(&|m| m.avg_queue_veh),
            completion_rate: if episodes.is_empty() { 1.0 } else { mean(&|m| m.completion_rate) },
        };
        EvalReport {
            scenario: scenario.name.clone(),
            mode: cfg.mode,
            compliance: cfg.compliance,
            demand_factor: cfg.demand_factor,
            seed: cfg.seed,
            episodes,
            aggregate,
        }
    }
}

/// The route non-compliant vehicles follow.
pub fn predefined_route(od: &OdPair) -> &Route {
    &od.routes[od.predefined]
}

/// The fixed-time plan used by the baselines.
pub fn fixed_time_controller(scenario: &Scenario) -> FixedTimePlan {
    FixedTimePlan::for_scenario(scenario)
}

/// Run one episode with greedy actions from `nets` (or none, for the fully
/// fixed baseline). When `dump` is set every agent's per-step record is
/// collected.
pub fn eval_episode(
    scenario: &Arc<Scenario>,
    set: &Arc<AgentSet>,
    nets: Option<&[AgentNets]>,
    mode: ControlMode,
    options: SimOptions,
    dump: bool,
) -> Result<(EpisodeMetrics, Vec<StepDump>), Maa2cError> {
    let mut env = Env::new(Arc::clone(scenario), Arc::clone(set), options, mode);
    let n = set.len();
    let mut states: Vec<LstmState> = match nets {
        Some(nets) => nets.iter().map(|a| a.policy.initial_state()).collect(),
        None => Vec::new(),
    };
    let mut dumps = Vec::new();
    while !env.is_done() {
        let obs = env.observe();
        let (actions, policies) = match nets {
            Some(nets) => {
                let mut actions = Vec::with_capacity(n);
                let mut policies = Vec::with_capacity(n);
                for g in 0..n {
                    let (p, next, _) = nets[g].policy.forward_policy(&obs[g], &states[g])?;
                    states[g] = next;
                    actions.push(argmax(&p));
                    policies.push(p);
                }
                (actions, policies)
            }
            None => (vec![0; n], set.uniform_fingerprints()),
        };
        let step = env.step_index();
        let out = env.act(&actions, policies)?;
        if dump {
            for g in 0..n {
                let r = out.rewards[g];
                dumps.push(StepDump {
                    step,
                    agent: set.id(g).to_string(),
                    observation: obs[g].clone(),
                    action: actions[g],
                    local_raw: r.local_raw,
                    shared_raw: r.shared_raw,
                    local: r.local,
                    shared: r.shared,
                });
            }
        }
    }
    Ok((env.sim().metrics(), dumps))
}

fn check_rates(cfg: &EvalConfig) -> Result<(), Maa2cError> {
    if !(0.0..=1.0).contains(&cfg.compliance) {
        return Err(Maa2cError::Config(format!("compliance {} is outside [0, 1]", cfg.compliance)));
    }
    if cfg.demand_factor.is_nan() || cfg.demand_factor <= 0.0 {
        return Err(Maa2cError::Config(format!("demand factor {} must be positive", cfg.demand_factor)));
    }
    Ok(())
}

/// Evaluate a checkpoint on `scenario` over `cfg.episodes` episodes.
pub fn run_eval(checkpoint: &Checkpoint, scenario: Arc<Scenario>, cfg: &EvalConfig) -> Result<EvalReport, Maa2cError> {
    let set = Arc::new(AgentSet::new(&scenario));
    checkpoint.check_topology(&set)?;
    evaluate(&scenario, &set, Some(&checkpoint.nets), cfg)
}

/// Evaluate fixed-time signals with predefined routes; needs no checkpoint.
pub fn run_fixed_baseline(scenario: Arc<Scenario>, cfg: &EvalConfig) -> Result<EvalReport, Maa2cError> {
    let set = Arc::new(AgentSet::new(&scenario));
    let cfg = EvalConfig {
        mode: ControlMode::FixedBoth,
        ..cfg.clone()
    };
    evaluate(&scenario, &set, None, &cfg)
}

fn evaluate(
    scenario: &Arc<Scenario>,
    set: &Arc<AgentSet>,
    nets: Option<&[AgentNets]>,
    cfg: &EvalConfig,
) -> Result<EvalReport, Maa2cError> {
    check_rates(cfg)?;
    let episodes = (0..cfg.episodes)
        .map(|k| eval_episode(scenario, set, nets, cfg.mode, cfg.options(k), false).map(|r| r.0))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalReport::new(scenario, cfg, episodes))
}

/// One report per compliance rate, all other settings from `base`.
pub fn compliance_sweep(
    checkpoint: &Checkpoint,
    scenario: Arc<Scenario>,
    rates: &[f64],
    base: &EvalConfig,
) -> Result<Vec<EvalReport>, Maa2cError> {
    rates
        .par_iter()
        .map(|&compliance| {
            let cfg = EvalConfig {
                compliance,
                ..base.clone()
            };
            run_eval(checkpoint, Arc::clone(&scenario), &cfg)
        })
        .collect()
}

/// One report per demand factor, all other settings from `base`.
pub fn demand_sweep(
    checkpoint: &Checkpoint,
    scenario: Arc<Scenario>,
    factors: &[f64],
    base: &EvalConfig,
) -> Result<Vec<EvalReport>, Maa2cError> {
    factors
        .par_iter()
        .map(|&demand_factor| {
            let cfg = EvalConfig {
                demand_factor,
                ..base.clone()
            };
            run_eval(checkpoint, Arc::clone(&scenario), &cfg)
        })
        .collect()
}

/// Which sweep a plot file describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Compliance,
    Demand,
}

/// One row of a sweep plot file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Compliance rate or demand factor.
    pub x: f64,
    pub arrived: f64,
    /// Only recorded in demand sweeps.
    pub departed: Option<f64>,
    pub completion: Option<f64>,
    pub delay: f64,
    pub speed: f64,
    pub queue: f64,
}

impl SweepRow {
    pub fn from_report(kind: SweepKind, r: &EvalReport) -> Self {
        let a = &r.aggregate;
        SweepRow {
            x: match kind {
                SweepKind::Compliance => r.compliance,
                SweepKind::Demand => r.demand_factor,
            },
            arrived: a.arrived,
            departed: (kind == SweepKind::Demand).then_some(a.departed),
            completion: (kind == SweepKind::Demand).then_some(a.completion_rate),
            delay: a.avg_delay_s,
            speed: a.avg_speed_mps,
            queue: a.avg_queue_veh,
        }
    }
}

fn a_or_nan(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Maa2cError + '_ {
    move |e| Maa2cError::Csv {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Write sweep plot data. Compliance files have columns
/// `rate,arrived,delay,speed,queue`; demand files
/// `factor,arrived,departed,completion,delay,speed,queue`.
pub fn emit_plot_data(kind: SweepKind, reports: &[EvalReport], path: impl AsRef<Path>) -> Result<(), Maa2cError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let header: &[&str] = match kind {
        SweepKind::Compliance => &["rate", "arrived", "delay", "speed", "queue"],
        SweepKind::Demand => &["factor", "arrived", "departed", "completion", "delay", "speed", "queue"],
    };
    w.write_record(header).map_err(csv_err(path))?;
    for r in reports {
        let row = SweepRow::from_report(kind, r);
        let values = match kind {
            SweepKind::Compliance => vec![row.x, row.arrived, row.delay, row.speed, row.queue],
            SweepKind::Demand => vec![
                row.x,
                row.arrived,
                a_or_nan(row.departed),
                a_or_nan(row.completion),
                row.delay,
                row.speed,
                row.queue,
            ],
        };
        w.write_record(values.iter().map(f64::to_string)).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Maa2cError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read a file written by [`emit_plot_data`].
pub fn read_plot_data(kind: SweepKind, path: impl AsRef<Path>) -> Result<Vec<SweepRow>, Maa2cError> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Maa2cError::Csv {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        out.push(match kind {
            SweepKind::Compliance => SweepRow {
                x: v[0],
                arrived: v[1],
                departed: None,
                completion: None,
                delay: v[2],
                speed: v[3],
                queue: v[4],
            },
            SweepKind::Demand => SweepRow {
                x: v[0],
                arrived: v[1],
                departed: Some(v[2]),
                completion: Some(v[3]),
                delay: v[4],
                speed: v[5],
                queue: v[6],
            },
        });
    }
    Ok(out)
}
