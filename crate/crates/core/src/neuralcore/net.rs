//! The per-agent network: one ReLU front-end layer per input block, a merge
//! by concatenation, an LSTM trunk and a policy or value head.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{add_transposed, affine, gemm, Param, View};
use super::{softmax, NnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadKind {
    /// Softmax over `outputs` actions.
    Policy,
    /// A single state value.
    Value,
}

/// Static shape of a network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    /// Input block sizes; a zero-sized block has no front-end layer.
    pub blocks: [usize; 4],
    /// Front-end layer widths, one per block.
    pub fc: [usize; 4],
    pub hidden: usize,
    pub outputs: usize,
    pub head: HeadKind,
}

impl NetSpec {
    pub fn input_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Width of the concatenated front-end output.
    pub fn merged_dim(&self) -> usize {
        (0..4).filter(|&k| self.blocks[k] > 0).map(|k| self.fc[k]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Param,
    pub b: Param,
}

impl Dense {
    fn new(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            w: Param::glorot(outputs, inputs, rng),
            b: Param::zeros(1, outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.w.value.cols
    }

    pub fn outputs(&self) -> usize {
        self.w.value.rows
    }

    /// `max(0, W x + b)`.
    pub fn forward_relu(&self, x: &[f64], out: &mut [f64]) {
        affine(&self.w.value.data, &self.b.value.data, x, out);
        out.iter_mut().for_each(|v| *v = v.max(0.0));
    }

    /// Accumulate gradients for a batch of ReLU outputs.
    ///
    /// `inputs` is an `n x inputs()` view; `outputs` and `d_out` hold
    /// `n x outputs()` values with row strides `out_stride` and `d_stride`.
    /// Returns the gradient with respect to the inputs when `want_input` is
    /// set.
    pub fn backward_relu(
        &mut self,
        inputs: View,
        outputs: (&[f64], usize),
        d_out: (&[f64], usize),
        want_input: bool,
    ) -> Option<Vec<f64>> {
        let (outputs, out_stride) = outputs;
        let (d_out, d_stride) = d_out;
        let n = inputs.rows;
        let h = self.outputs();
        let mut dz = vec![0.0; n * h];
        for t in 0..n {
            for j in 0..h {
                let z = outputs[t * out_stride + j];
                if z > 0.0 {
                    dz[t * h + j] = d_out[t * d_stride + j];
                }
            }
        }
        let dzv = View::row_major(&dz, n, h);
        let cols = self.inputs();
        gemm(dzv.t(), inputs, 1.0, &mut self.w.grad.data, cols);
        for t in 0..n {
            for (g, d) in self.b.grad.data.iter_mut().zip(&dz[t * h..(t + 1) * h]) {
                *g += d;
            }
        }
        want_input.then(|| {
            let mut dx = vec![0.0; n * self.inputs()];
            gemm(dzv, View::row_major(&self.w.value.data, h, self.inputs()), 0.0, &mut dx, self.inputs());
            dx
        })
    }
}

/// Recurrent state carried between control steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Activations of one forward step, kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCache {
    pub input: Vec<f64>,
    /// Front-end outputs followed by the incoming hidden state.
    pub xh: Vec<f64>,
    /// Activated gates: input, forget, output, candidate.
    pub gates: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
    /// Head output: logits or the single value.
    pub out: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentNet {
    pub spec: NetSpec,
    /// One front-end layer per non-empty input block.
    pub front: [Option<Dense>; 4],
    /// Gate weights, `4H x (M + H)`: rows are input, forget, output and
    /// candidate gates; columns the merged features then the hidden state.
    pub lstm_w: Param,
    pub lstm_b: Param,
    pub head: Dense,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl AgentNet {
    /// Glorot-uniform weights, zero biases except a forget-gate bias of 1.
    pub fn init(spec: NetSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let front = [0, 1, 2, 3].map(|k| (spec.blocks[k] > 0).then(|| Dense::new(spec.blocks[k], spec.fc[k], &mut rng)));
        let h = spec.hidden;
        let m = spec.merged_dim();
        let lstm_w = Param::glorot(4 * h, m + h, &mut rng);
        let mut lstm_b = Param::zeros(1, 4 * h);
        lstm_b.value.data[h..2 * h].iter_mut().for_each(|b| *b = 1.0);
        let head = Dense::new(h, spec.outputs, &mut rng);
        AgentNet {
            spec,
            front,
            lstm_w,
            lstm_b,
            head,
        }
    }

    pub fn hidden(&self) -> usize {
        self.spec.hidden
    }

    pub fn initial_state(&self) -> LstmState {
        LstmState::zeros(self.spec.hidden)
    }

    /// Every parameter in a fixed order.
    pub fn params(&self) -> Vec<&Param> {
        let mut out = Vec::new();
        for d in self.front.iter().flatten() {
            out.push(&d.w);
            out.push(&d.b);
        }
        out.extend([&self.lstm_w, &self.lstm_b, &self.head.w, &self.head.b]);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out = Vec::new();
        for d in self.front.iter_mut().flatten() {
            out.push(&mut d.w);
            out.push(&mut d.b);
        }
        out.push(&mut self.lstm_w);
        out.push(&mut self.lstm_b);
        out.push(&mut self.head.w);
        out.push(&mut self.head.b);
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    fn block_range(&self, k: usize) -> std::ops::Range<usize> {
        let start: usize = self.spec.blocks[..k].iter().sum();
        start..start + self.spec.blocks[k]
    }

    fn check_input(&self, obs: &[f64]) -> Result<(), NnError> {
        let expected = self.spec.input_dim();
        if obs.len() != expected {
            return Err(NnError::DimensionMismatch {
                expected,
                got: obs.len(),
            });
        }
        Ok(())
    }

    fn cell(&self, pre: &mut [f64], state: &LstmState) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = self.spec.hidden;
        for v in &mut pre[..3 * h] {
            *v = sigmoid(*v);
        }
        for v in &mut pre[3 * h..] {
            *v = v.tanh();
        }
        let mut c = vec![0.0; h];
        let mut tanh_c = vec![0.0; h];
        let mut hidden = vec![0.0; h];
        for j in 0..h {
            let (i, f, o, g) = (pre[j], pre[h + j], pre[2 * h + j], pre[3 * h + j]);
            c[j] = f * state.c[j] + i * g;
            tanh_c[j] = c[j].tanh();
            hidden[j] = o * tanh_c[j];
        }
        (c, tanh_c, hidden)
    }

    fn head_out(&self, h: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.spec.outputs];
        affine(&self.head.w.value.data, &self.head.b.value.data, h, &mut out);
        out
    }

    /// One recurrent step. Returns the raw head output.
    pub fn forward_step(&self, obs: &[f64], state: &LstmState) -> Result<(Vec<f64>, LstmState, StepCache), NnError> {
        self.check_input(obs)?;
        let h = self.spec.hidden;
        let m = self.spec.merged_dim();
        let mut xh = vec![0.0; m + h];
        let mut at = 0;
        for k in 0..4 {
            if let Some(d) = &self.front[k] {
                d.forward_relu(&obs[self.block_range(k)], &mut xh[at..at + d.outputs()]);
                at += d.outputs();
            }
        }
        xh[m..].copy_from_slice(&state.h);
        let mut pre = vec![0.0; 4 * h];
        affine(&self.lstm_w.value.data, &self.lstm_b.value.data, &xh, &mut pre);
        let (c, tanh_c, hidden) = self.cell(&mut pre, state);
        let out = self.head_out(&hidden);
        let next = LstmState {
            h: hidden.clone(),
            c: c.clone(),
        };
        let cache = StepCache {
            input: obs.to_vec(),
            xh,
            gates: pre,
            c_prev: state.c.clone(),
            c,
            tanh_c,
            h: hidden,
            out: out.clone(),
        };
        Ok((out, next, cache))
    }

    /// Action probabilities for one step.
    pub fn forward_policy(&self, obs: &[f64], state: &LstmState) -> Result<(Vec<f64>, LstmState, StepCache), NnError> {
        let (logits, next, cache) = self.forward_step(obs, state)?;
        Ok((softmax(&logits), next, cache))
    }

    /// State value for one step.
    pub fn forward_value(&self, obs: &[f64], state: &LstmState) -> Result<(f64, LstmState, StepCache), NnError> {
        let (out, next, cache) = self.forward_step(obs, state)?;
        Ok((out[0], next, cache))
    }

    /// Unroll over a sequence, batching the non-recurrent work. Produces the
    /// same outputs and caches as repeated [`AgentNet::forward_step`] calls.
    pub fn forward_sequence(
        &self,
        obs: &[Vec<f64>],
        state: &LstmState,
    ) -> Result<(Vec<Vec<f64>>, LstmState, Vec<StepCache>), NnError> {
        for o in obs {
            self.check_input(o)?;
        }
        let n = obs.len();
        let h = self.spec.hidden;
        let m = self.spec.merged_dim();
        let d = self.spec.input_dim();
        let mut stacked = Vec::with_capacity(n * d);
        for o in obs {
            stacked.extend_from_slice(o);
        }

        let mut merged = vec![0.0; n * m];
        let mut at = 0;
        for k in 0..4 {
            let Some(layer) = &self.front[k] else { continue };
            let r = self.block_range(k);
            let w = layer.outputs();
            let input = View::columns(&stacked, n, d, r.start, r.len());
            let weights = View::row_major(&layer.w.value.data, w, r.len()).t();
            gemm(input, weights, 0.0, &mut merged[at..], m);
            for t in 0..n {
                let row = &mut merged[t * m + at..t * m + at + w];
                for (v, b) in row.iter_mut().zip(&layer.b.value.data) {
                    *v = (*v + b).max(0.0);
                }
            }
            at += w;
        }

        let stride = m + h;
        let mut pre_x = vec![0.0; n * 4 * h];
        let wx = View::columns(&self.lstm_w.value.data, 4 * h, stride, 0, m).t();
        gemm(View::row_major(&merged, n, m), wx, 0.0, &mut pre_x, 4 * h);

        let w = &self.lstm_w.value.data;
        let b = &self.lstm_b.value.data;
        let mut cur = state.clone();
        let mut outs = Vec::with_capacity(n);
        let mut caches = Vec::with_capacity(n);
        for t in 0..n {
            let mut pre = pre_x[t * 4 * h..(t + 1) * 4 * h].to_vec();
            for (r, p) in pre.iter_mut().enumerate() {
                *p += b[r] + super::tensor::dot(&w[r * stride + m..r * stride + m + h], &cur.h);
            }
            let mut xh = merged[t * m..(t + 1) * m].to_vec();
            xh.extend_from_slice(&cur.h);
            let (c, tanh_c, hidden) = self.cell(&mut pre, &cur);
            let out = self.head_out(&hidden);
            let next = LstmState {
                h: hidden.clone(),
                c: c.clone(),
            };
            caches.push(StepCache {
                input: obs[t].clone(),
                xh,
                gates: pre,
                c_prev: cur.c.clone(),
                c,
                tanh_c,
                h: hidden,
                out: out.clone(),
            });
            outs.push(out);
            cur = next;
        }
        Ok((outs, cur, caches))
    }

    /// Backpropagate through a contiguous unroll and accumulate parameter
    /// gradients.
    ///
    /// `d_out` holds the loss gradient with respect to each step's head
    /// output, row-major `caches.len() x outputs`. The state entering the
    /// first cached step is treated as a constant: no gradient flows past the
    /// start of the unroll.
    pub fn backward(&mut self, caches: &[StepCache], d_out: &[f64]) -> Result<(), NnError> {
        let n = caches.len();
        if n == 0 {
            return Err(NnError::MissingCache);
        }
        let o = self.spec.outputs;
        if d_out.len() != n * o {
            return Err(NnError::DimensionMismatch {
                expected: n * o,
                got: d_out.len(),
            });
        }
        let h = self.spec.hidden;
        let m = self.spec.merged_dim();
        let stride = m + h;
        let d = self.spec.input_dim();

        let mut hs = Vec::with_capacity(n * h);
        for c in caches {
            hs.extend_from_slice(&c.h);
        }
        let dov = View::row_major(d_out, n, o);
        gemm(dov.t(), View::row_major(&hs, n, h), 1.0, &mut self.head.w.grad.data, h);
        for t in 0..n {
            for (g, v) in self.head.b.grad.data.iter_mut().zip(&d_out[t * o..(t + 1) * o]) {
                *g += v;
            }
        }
        let mut dh_head = vec![0.0; n * h];
        gemm(dov, View::row_major(&self.head.w.value.data, o, h), 0.0, &mut dh_head, h);

        let mut dg = vec![0.0; n * 4 * h];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let w = &self.lstm_w.value.data;
        for t in (0..n).rev() {
            let cache = &caches[t];
            let gates = &cache.gates;
            let row = &mut dg[t * 4 * h..(t + 1) * 4 * h];
            for j in 0..h {
                let (i, f, og, g) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                let dh = dh_head[t * h + j] + dh_next[j];
                let tc = cache.tanh_c[j];
                let dc = dh * og * (1.0 - tc * tc) + dc_next[j];
                row[j] = dc * g * i * (1.0 - i);
                row[h + j] = dc * cache.c_prev[j] * f * (1.0 - f);
                row[2 * h + j] = dh * tc * og * (1.0 - og);
                row[3 * h + j] = dc * i * (1.0 - g * g);
                dc_next[j] = dc * f;
            }
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            if t > 0 {
                add_transposed(&w[m..], stride, row, &mut dh_next);
            }
        }

        let mut xh = Vec::with_capacity(n * stride);
        for c in caches {
            xh.extend_from_slice(&c.xh);
        }
        let dgv = View::row_major(&dg, n, 4 * h);
        gemm(dgv.t(), View::row_major(&xh, n, stride), 1.0, &mut self.lstm_w.grad.data, stride);
        for t in 0..n {
            for (gb, v) in self.lstm_b.grad.data.iter_mut().zip(&dg[t * 4 * h..(t + 1) * 4 * h]) {
                *gb += v;
            }
        }

        if m == 0 {
            return Ok(());
        }
        let mut dx = vec![0.0; n * m];
        gemm(dgv, View::columns(w, 4 * h, stride, 0, m), 0.0, &mut dx, m);

        let mut inputs = Vec::with_capacity(n * d);
        for c in caches {
            inputs.extend_from_slice(&c.input);
        }
        let mut at = 0;
        for k in 0..4 {
            let r = self.block_range(k);
            let Some(layer) = &mut self.front[k] else { continue };
            let width = layer.outputs();
            let input = View::columns(&inputs, n, d, r.start, r.len());
            layer.backward_relu(input, (&xh[at..], stride), (&dx[at..], m), false);
            at += width;
        }
        Ok(())
    }
}
