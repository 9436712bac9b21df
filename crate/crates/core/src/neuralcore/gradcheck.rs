//! Central finite-difference checks of analytic gradients.

use super::AgentNet;

/// Denominator floor of [`relative_error`]; keeps entries whose true
/// gradient is essentially zero from dominating the maximum.
pub const REL_FLOOR: f64 = 1e-6;

/// `|a - n| / max(|a|, |n|, REL_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Central differences of `loss` with respect to every parameter entry, in
/// [`AgentNet::params`] order.
pub fn numeric_gradients(net: &AgentNet, eps: f64, loss: impl Fn(&AgentNet) -> f64) -> Vec<Vec<f64>> {
    let mut probe = net.clone();
    let sizes: Vec<usize> = net.params().iter().map(|p| p.value.len()).collect();
    let mut out = Vec::with_capacity(sizes.len());
    for (pi, &size) in sizes.iter().enumerate() {
        let mut grads = Vec::with_capacity(size);
        for k in 0..size {
            let orig = probe.params()[pi].value.data[k];
            probe.params_mut()[pi].value.data[k] = orig + eps;
            let up = loss(&probe);
            probe.params_mut()[pi].value.data[k] = orig - eps;
            let down = loss(&probe);
            probe.params_mut()[pi].value.data[k] = orig;
            grads.push((up - down) / (2.0 * eps));
        }
        out.push(grads);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// (parameter index, entry) of the worst entry.
    pub worst: (usize, usize),
    pub entries: usize,
}

/// Compare the gradients stored in `net` against numeric ones.
pub fn compare(net: &AgentNet, numeric: &[Vec<f64>]) -> GradCheck {
    let mut report = GradCheck {
        max_rel_error: 0.0,
        worst: (0, 0),
        entries: 0,
    };
    for (pi, (p, num)) in net.params().iter().zip(numeric).enumerate() {
        for (k, (&a, &n)) in p.grad.data.iter().zip(num).enumerate() {
            let e = relative_error(a, n);
            report.entries += 1;
            if e > report.max_rel_error {
                report.max_rel_error = e;
                report.worst = (pi, k);
            }
        }
    }
    report
}
