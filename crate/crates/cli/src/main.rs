//! `jointflow` command-line runner.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use jointflow::agents::AgentSet;
use jointflow::eval::{
    compliance_sweep, demand_sweep, emit_plot_data, eval_episode, run_eval, run_fixed_baseline, EvalConfig,
    EvalReport, SweepKind,
};
use jointflow::maa2c::{train, Checkpoint, ControlMode, TrainConfig};
use jointflow::netmodel::{validate_routes, ScenarioDoc, MINI_TOML, SIOUX_FALLS_TOML};
use jointflow::simcore::SimOptions;
use jointflow::{load_scenario, Scenario};
use serde_json::json;

#[derive(Parser)]
#[command(name = "jointflow", version, about = "Train and evaluate joint signal and route control agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every agent on a scenario.
    Train(TrainArgs),
    /// Evaluate a checkpoint (or the fixed baseline) with greedy actions.
    Eval(EvalArgs),
    /// Evaluate a checkpoint at several compliance rates.
    SweepCompliance(SweepArgs),
    /// Evaluate a checkpoint at several demand factors.
    SweepDemand(SweepArgs),
    /// Scenario file utilities.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Control steps to train for; defaults to the scenario's setting.
    #[arg(long, conflicts_with = "episodes")]
    steps: Option<usize>,
    /// Train for this many full episodes instead of a step budget.
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "joint")]
    mode: ControlMode,
    /// Episodes between periodic checkpoints.
    #[arg(long, default_value_t = 50)]
    checkpoint_every: usize,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint to evaluate; optional for `--mode fixed`.
    #[arg(long)]
    ckpt: Option<PathBuf>,
    /// Scenario to evaluate on; defaults to the one stored in the checkpoint.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value = "joint")]
    mode: ControlMode,
    #[arg(long, default_value_t = 10)]
    episodes: usize,
    #[arg(long, default_value_t = 1.0)]
    compliance: f64,
    #[arg(long, default_value_t = 1.0)]
    demand_factor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-step, per-agent records of the first episode as JSON lines.
    #[arg(long)]
    dump_steps: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Compliance rates (sweep-compliance only).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    rates: Vec<f64>,
    /// Demand factors (sweep-demand only).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    factors: Vec<f64>,
    #[arg(long, default_value = "joint")]
    mode: ControlMode,
    #[arg(long, default_value_t = 10)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Plot-data CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also write the full reports as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Check a scenario file and print a summary.
    Validate { file: PathBuf },
    /// Write the built-in Sioux Falls scenario.
    Sioux {
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the built-in two-signal mini scenario.
    Mini {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::SweepCompliance(a) => cmd_sweep(a, SweepKind::Compliance),
        Command::SweepDemand(a) => cmd_sweep(a, SweepKind::Demand),
        Command::Scenario(ScenarioCommand::Validate { file }) => cmd_validate(&file),
        Command::Scenario(ScenarioCommand::Sioux { out }) => write_text(&out, SIOUX_FALLS_TOML),
        Command::Scenario(ScenarioCommand::Mini { out }) => write_text(&out, MINI_TOML),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => write_text(p, &(text + "\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let scenario = Arc::new(load_scenario(&a.scenario)?);
    let mut cfg = TrainConfig::new(&scenario.hyper, a.seed);
    if let Some(steps) = a.steps {
        cfg.total_steps = steps;
    }
    if let Some(episodes) = a.episodes {
        cfg.total_steps = episodes * scenario.control_steps();
    }
    if cfg.total_steps == 0 {
        bail!("nothing to train: the step budget is zero");
    }
    cfg.mode = a.mode;
    cfg.checkpoint_every = a.checkpoint_every;
    cfg.out_dir = Some(a.out.clone());
    let out = train(Arc::clone(&scenario), &cfg)?;
    let summary = json!({
        "scenario": scenario.name,
        "mode": a.mode,
        "seed": a.seed,
        "control_steps": out.steps,
        "episodes": out.curve.episodes.len(),
        "batches": out.batch_lengths.len(),
        "curve": a.out.join("curve.csv"),
        "checkpoint": a.out.join("ckpt_final"),
    });
    write_json(Some(&a.out.join("train_summary.json")), &summary)?;
    write_json(None, &summary)
}

fn scenario_for(ckpt: Option<&Checkpoint>, file: Option<&Path>) -> Result<Arc<Scenario>> {
    let scenario = match (file, ckpt) {
        (Some(f), _) => load_scenario(f)?,
        (None, Some(c)) => c.scenario()?,
        (None, None) => bail!("give --scenario when no checkpoint is used"),
    };
    Ok(Arc::new(scenario))
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let ckpt = a.ckpt.as_deref().map(load_checkpoint).transpose()?;
    let scenario = scenario_for(ckpt.as_ref(), a.scenario.as_deref())?;
    let cfg = EvalConfig {
        mode: a.mode,
        episodes: a.episodes,
        compliance: a.compliance,
        demand_factor: a.demand_factor,
        seed: a.seed,
    };
    let report: EvalReport = match (&ckpt, a.mode) {
        (Some(c), _) => run_eval(c, Arc::clone(&scenario), &cfg)?,
        (None, ControlMode::FixedBoth) => run_fixed_baseline(Arc::clone(&scenario), &cfg)?,
        (None, mode) => bail!("mode {mode} needs --ckpt"),
    };
    if let Some(path) = &a.dump_steps {
        let set = Arc::new(AgentSet::new(&scenario));
        let options = SimOptions {
            compliance: a.compliance,
            demand_factor: a.demand_factor,
            ..SimOptions::new(a.seed)
        };
        let nets = ckpt.as_ref().map(|c| c.nets.as_slice());
        let (_, dumps) = eval_episode(&scenario, &set, nets, a.mode, options, true)?;
        let mut text = String::new();
        for d in &dumps {
            text.push_str(&serde_json::to_string(d)?);
            text.push('\n');
        }
        write_text(path, &text)?;
    }
    write_json(a.out.as_deref(), &report)
}

fn cmd_sweep(a: SweepArgs, kind: SweepKind) -> Result<()> {
    let ckpt = load_checkpoint(&a.ckpt)?;
    let scenario = scenario_for(Some(&ckpt), a.scenario.as_deref())?;
    let base = EvalConfig {
        episodes: a.episodes,
        ..EvalConfig::new(a.mode, a.seed)
    };
    let reports = match kind {
        SweepKind::Compliance => {
            if a.rates.is_empty() {
                bail!("give --rates");
            }
            compliance_sweep(&ckpt, scenario, &a.rates, &base)?
        }
        SweepKind::Demand => {
            if a.factors.is_empty() {
                bail!("give --factors");
            }
            demand_sweep(&ckpt, scenario, &a.factors, &base)?
        }
    };
    emit_plot_data(kind, &reports, &a.out)?;
    if let Some(path) = &a.json {
        write_json(Some(path), &reports)?;
    }
    println!("wrote {} rows to {}", reports.len(), a.out.display());
    Ok(())
}

fn cmd_validate(file: &Path) -> Result<()> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let doc = ScenarioDoc::parse(&text)?;
    let diagnostics = validate_routes(&doc);
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("demand row {}, route {}: {}", d.od, d.route, d.message);
        }
        bail!("{} route problem(s) in {}", diagnostics.len(), file.display());
    }
    let scenario = Scenario::from_toml(&text)?;
    let set = AgentSet::new(&scenario);
    write_json(
        None,
        &json!({
            "name": scenario.name,
            "nodes": scenario.network.nodes.len(),
            "edges": scenario.network.edges.len(),
            "od_pairs": scenario.ods.len(),
            "total_peak_vph": scenario.total_peak_vph(),
            "signal_agents": set.signals.len(),
            "routing_agents": set.routers.len(),
            "control_steps": scenario.control_steps(),
        }),
    )
}
