//! Returns, advantages and the two losses.

use super::Maa2cError;
use crate::neuralcore::{entropy, entropy_grad, log_softmax, softmax};

/// Discounted returns bootstrapped by `bootstrap` after the last reward,
/// computed by the backward recursion `R_t = r_t + gamma R_{t+1}`.
pub fn td_targets(rewards: &[f64], bootstrap: f64, gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut next = bootstrap;
    for t in (0..rewards.len()).rev() {
        next = rewards[t] + gamma * next;
        out[t] = next;
    }
    out
}

/// `R - V` elementwise; no normalisation.
pub fn advantages(returns: &[f64], values: &[f64]) -> Result<Vec<f64>, Maa2cError> {
    if returns.len() != values.len() {
        return Err(Maa2cError::LengthMismatch {
            left: returns.len(),
            right: values.len(),
        });
    }
    Ok(returns.iter().zip(values).map(|(r, v)| r - v).collect())
}

/// `(1 / 2n) sum (R - V)^2`.
pub fn value_loss(returns: &[f64], values: &[f64]) -> f64 {
    let n = returns.len() as f64;
    returns.iter().zip(values).map(|(r, v)| (r - v).powi(2)).sum::<f64>() / (2.0 * n)
}

/// Gradient of [`value_loss`] with respect to each `V_t`: `-(R_t - V_t) / n`.
pub fn value_loss_grad(returns: &[f64], values: &[f64]) -> Vec<f64> {
    let n = returns.len() as f64;
    returns.iter().zip(values).map(|(r, v)| -(r - v) / n).collect()
}

/// The policy objective for one unroll and the gradient of `-J` with
/// respect to the logits, row-major `n x actions`.
///
/// `J = (1/n) sum_t [A_t log pi(a_t | s_t) + beta H(pi(s_t))]`; advantages
/// are constants.
pub fn policy_objective(logits: &[&[f64]], actions: &[usize], adv: &[f64], beta: f64) -> (f64, Vec<f64>) {
    let n = logits.len() as f64;
    let mut j = 0.0;
    let mut grad = Vec::with_capacity(logits.iter().map(|z| z.len()).sum());
    for (t, z) in logits.iter().enumerate() {
        let p = softmax(z);
        j += adv[t] * log_softmax(z, actions[t]) + beta * entropy(&p);
        let dh = entropy_grad(&p);
        for (k, pk) in p.iter().enumerate() {
            let onehot = if k == actions[t] { 1.0 } else { 0.0 };
            grad.push(-(adv[t] * (onehot - pk) + beta * dh[k]) / n);
        }
    }
    (j / n, grad)
}

/// Sum of local rewards over all steps and agents.
pub fn episode_reward(local: &[Vec<f64>]) -> f64 {
    local.iter().flatten().sum()
}
