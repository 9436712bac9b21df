//! Local and shared rewards.

use super::{AgentKind, AgentSet, Measurements};

/// One agent's rewards for one control step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardRecord {
    /// Local reward before normalisation.
    pub local_raw: f64,
    /// Shared reward before normalisation.
    pub shared_raw: f64,
    /// Normalised and clipped local reward.
    pub local: f64,
    /// Normalised and clipped shared reward; the training signal.
    pub shared: f64,
}

/// Shared rewards from raw local rewards (indexed globally).
///
/// A signal agent adds `beta_ss` times its adjacent signal agents' rewards
/// and `beta_sr * alpha` times each relevant routing agent's reward. A
/// routing agent adds `beta_rs * alpha` times each relevant signal agent's
/// reward; routing agents of one OD pair already share the same local
/// reward, so no routing-routing term is added.
pub fn shared_rewards(set: &AgentSet, local: &[f64]) -> Vec<f64> {
    let h = &set.hyper;
    let n_sa = set.signals.len();
    (0..set.len())
        .map(|g| match set.id(g).kind {
            AgentKind::Signal => {
                let ss: f64 = set.graph.sa_ss[g].iter().map(|&j| local[j]).sum();
                let sr: f64 = set.graph.sa_sr[g].iter().map(|r| r.alpha * local[n_sa + r.index]).sum();
                local[g] + h.beta_ss * ss + h.beta_sr * sr
            }
            AgentKind::Routing => {
                let rs: f64 = set.graph.ra_rs[g - n_sa].iter().map(|r| r.alpha * local[r.index]).sum();
                local[g] + h.beta_rs * rs
            }
        })
        .collect()
}

impl AgentSet {
    /// Raw local reward: minus the step's waiting plus head-of-queue waiting
    /// for a signal agent; weighted OD arrivals for a routing agent.
    pub fn local_reward_raw(&self, g: usize, m: &Measurements) -> f64 {
        let h = &self.hyper;
        match self.id(g).kind {
            AgentKind::Signal => {
                let wait: f64 = m.sa_wait[g].iter().sum();
                let first: f64 = m.sa_first_wait[g].iter().sum();
                -(wait + h.alpha1 * first)
            }
            AgentKind::Routing => {
                let od = self.routers[g - self.signals.len()].placement.od;
                h.alpha2 * m.od_arrived[od]
            }
        }
    }

    /// Divide by the agent kind's reward factor and clip.
    pub fn normalize_reward(&self, g: usize, raw: f64) -> f64 {
        let h = &self.hyper;
        let factor = match self.id(g).kind {
            AgentKind::Signal => h.norm_reward_sa,
            AgentKind::Routing => h.norm_reward_ra,
        };
        let [lo, hi] = h.reward_clip;
        (raw / factor).clamp(lo, hi)
    }

    pub fn rewards(&self, m: &Measurements) -> Vec<RewardRecord> {
        let local: Vec<f64> = (0..self.len()).map(|g| self.local_reward_raw(g, m)).collect();
        let shared = shared_rewards(self, &local);
        (0..self.len())
            .map(|g| RewardRecord {
                local_raw: local[g],
                shared_raw: shared[g],
                local: self.normalize_reward(g, local[g]),
                shared: self.normalize_reward(g, shared[g]),
            })
            .collect()
    }
}
