//! Joint traffic-signal and vehicle-route control on signalised road networks.
//!
//! Signal agents pick the active phase of one intersection every control
//! step; routing agents sit just upstream of route forks and pick the route
//! for the vehicles about to reach the fork. Both kinds are trained with a
//! multi-agent advantage actor-critic on top of a point-queue simulator.
//!
//! Module map:
//!
//! - [`netmodel`]: scenario files, road graph, phases, routes, agent placement
//! - [`simcore`]: one-second tick point-queue simulator and raw measurements
//! - [`agents`]: observations, fingerprints, local and shared rewards
//! - [`neuralcore`]: dense + LSTM networks with hand-written gradients, Adam
//! - [`maa2c`]: batch collection, TD targets, losses and the training loop
//! - [`eval`]: greedy evaluation, baselines and sweeps

pub mod netmodel;
pub mod simcore;
pub mod agents;
pub mod neuralcore;
pub mod maa2c;
pub mod eval;

pub use netmodel::{build_sioux_falls, load_scenario, Scenario, ScenarioError};

/// The guide's chapters, compiled so that their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/agents.md")]
    mod agents {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
