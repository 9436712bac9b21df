//! Gradient clipping and Adam.

use serde::{Deserialize, Serialize};

use super::Param;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Maximum global gradient norm; `<= 0` disables clipping.
    pub max_grad_norm: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 2.5e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            max_grad_norm: 30.0,
        }
    }
}

pub fn grad_norm<'a>(params: impl IntoIterator<Item = &'a Param>) -> f64 {
    params
        .into_iter()
        .flat_map(|p| p.grad.data.iter())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt()
}

/// Rescale all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_grad_norm(params: &mut [&mut Param], max_norm: f64) -> f64 {
    let norm = grad_norm(params.iter().map(|p| &**p));
    if max_norm > 0.0 && norm > max_norm {
        let scale = max_norm / norm;
        for p in params.iter_mut() {
            p.grad.data.iter_mut().for_each(|g| *g *= scale);
        }
    }
    norm
}

/// One bias-corrected Adam update of a single parameter from its gradient.
pub fn adam_step(p: &mut Param, cfg: &OptimizerConfig) {
    p.step += 1;
    let t = p.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..p.value.data.len() {
        let g = p.grad.data[i];
        let m = cfg.beta1 * p.m.data[i] + (1.0 - cfg.beta1) * g;
        let v = cfg.beta2 * p.v.data[i] + (1.0 - cfg.beta2) * g * g;
        p.m.data[i] = m;
        p.v.data[i] = v;
        p.value.data[i] -= cfg.learning_rate * (m / c1) / ((v / c2).sqrt() + cfg.eps);
    }
}
