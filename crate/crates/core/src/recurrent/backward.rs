//! Loss terms and their exact gradients by backpropagation through time.

use super::linalg::{axpy, matvec_t_acc, outer_acc};
use super::{Activation, CellKind, ForwardTrace, ModelError, RecurrentModel};

/// Which final representation the orderless loss compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OlrTarget {
    /// Scalar output of the regression head.
    RegressionOutput,
    /// Full logit vector of the next-token head.
    Logits,
    /// Top-layer hidden state.
    Hidden,
}

impl OlrTarget {
    pub fn name(self) -> &'static str {
        match self {
            OlrTarget::RegressionOutput => "regression_output",
            OlrTarget::Logits => "logits",
            OlrTarget::Hidden => "hidden",
        }
    }
}

/// One term of a combined objective.
#[derive(Debug, Clone, Copy)]
pub enum LossTerm<'a> {
    /// `(y - target)²` on the final regression output.
    Regression { ids: &'a [usize], target: f64 },
    /// Mean next-token cross-entropy with teacher forcing.
    NextToken { ids: &'a [usize] },
    /// Squared distance between the final representations of two sequences.
    Olr { a: &'a [usize], b: &'a [usize], target: OlrTarget },
}

/// Unweighted value of each term and the weighted total.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub total: f64,
    pub terms: Vec<f64>,
}

/// Gradient of a loss with respect to the flat parameter buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    values: Vec<f64>,
}

impl Gradients {
    pub fn zeros(len: usize) -> Gradients {
        Gradients { values: vec![0.0; len] }
    }

    pub fn from_values(values: Vec<f64>) -> Gradients {
        Gradients { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Global Euclidean norm.
    pub fn norm(&self) -> f64 {
        super::linalg::dot(&self.values, &self.values).sqrt()
    }

    pub fn add_scaled(&mut self, other: &Gradients, weight: f64) {
        axpy(weight, &other.values, &mut self.values);
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|g| *g *= factor);
    }
}

/// Loss derivatives with respect to one trace's outputs.
struct Seed {
    outputs: Vec<f64>,
    logits: Vec<f64>,
    hidden: Vec<f64>,
}

impl Seed {
    fn new(trace: &ForwardTrace) -> Seed {
        Seed {
            outputs: vec![0.0; trace.len()],
            logits: Vec::new(),
            hidden: Vec::new(),
        }
    }
}

fn log_softmax_grad(logits: &[f64], target: usize, scale: f64, out: &mut [f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|&z| (z - max).exp()).sum();
    let lse = max + sum.ln();
    for (o, &z) in out.iter_mut().zip(logits) {
        *o += scale * (z - lse).exp();
    }
    out[target] -= scale;
    lse - logits[target]
}

impl RecurrentModel {
    /// Squared error of the final regression output against `target`.
    pub fn task_loss_regression(&self, ids: &[usize], target: f64) -> Result<f64, ModelError> {
        let y = self.predict(ids)?;
        Ok((y - target) * (y - target))
    }

    /// Mean of [`RecurrentModel::task_loss_regression`] over a batch.
    pub fn task_loss_regression_batch(&self, batch: &[(Vec<usize>, f64)]) -> Result<f64, ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyInput);
        }
        let mut sum = 0.0;
        for (ids, target) in batch {
            sum += self.task_loss_regression(ids, *target)?;
        }
        Ok(sum / batch.len() as f64)
    }

    /// Mean cross-entropy of predicting `ids[t + 1]` from the logits at step `t`.
    pub fn task_loss_lm(&self, ids: &[usize]) -> Result<f64, ModelError> {
        Ok(self.evaluate(&[(1.0, LossTerm::NextToken { ids })])?.total)
    }

    /// Orderless regularization between two sequences; symmetric and non-negative.
    pub fn olr_loss(&self, a: &[usize], b: &[usize], target: OlrTarget) -> Result<f64, ModelError> {
        Ok(self.evaluate(&[(1.0, LossTerm::Olr { a, b, target })])?.total)
    }

    /// Value of a weighted sum of terms without gradients.
    pub fn evaluate(&self, terms: &[(f64, LossTerm<'_>)]) -> Result<LossReport, ModelError> {
        self.run_terms(terms, None)
    }

    /// Value and exact gradient of `Σ weight · term`.
    pub fn backward(&self, terms: &[(f64, LossTerm<'_>)]) -> Result<(LossReport, Gradients), ModelError> {
        let mut grads = Gradients::zeros(self.param_count());
        let report = self.run_terms(terms, Some(&mut grads.values))?;
        Ok((report, grads))
    }

    fn run_terms(&self, terms: &[(f64, LossTerm<'_>)], mut grad: Option<&mut [f64]>) -> Result<LossReport, ModelError> {
        let mut report = LossReport {
            total: 0.0,
            terms: Vec::with_capacity(terms.len()),
        };
        for &(w, term) in terms {
            let value = match term {
                LossTerm::Regression { ids, target } => {
                    let tr = self.forward(ids)?;
                    let diff = tr.final_output() - target;
                    if let Some(g) = grad.as_deref_mut() {
                        let mut seed = Seed::new(&tr);
                        seed.outputs[tr.len() - 1] = 2.0 * w * diff;
                        self.backprop(&tr, &seed, g);
                    }
                    diff * diff
                }
                LossTerm::NextToken { ids } => {
                    if ids.len() < 2 {
                        return Err(ModelError::SequenceTooShort(ids.len()));
                    }
                    let tr = self.forward(ids)?;
                    let v = self.vocab_size();
                    let steps = ids.len() - 1;
                    let mut seed = Seed::new(&tr);
                    seed.logits = vec![0.0; tr.len() * v];
                    let mut sum = 0.0;
                    for t in 0..steps {
                        let out = &mut seed.logits[t * v..(t + 1) * v];
                        sum += log_softmax_grad(tr.logits(t), ids[t + 1], w / steps as f64, out);
                    }
                    if let Some(g) = grad.as_deref_mut() {
                        self.backprop(&tr, &seed, g);
                    }
                    sum / steps as f64
                }
                LossTerm::Olr { a, b, target } => {
                    let (ta, tb) = (self.forward(a)?, self.forward(b)?);
                    let (ra, rb): (&[f64], &[f64]) = match target {
                        OlrTarget::RegressionOutput => (
                            std::slice::from_ref(&ta.outputs[ta.len() - 1]),
                            std::slice::from_ref(&tb.outputs[tb.len() - 1]),
                        ),
                        OlrTarget::Logits => (ta.final_logits(), tb.final_logits()),
                        OlrTarget::Hidden => (ta.final_hidden(), tb.final_hidden()),
                    };
                    let diff: Vec<f64> = ra.iter().zip(rb).map(|(x, y)| x - y).collect();
                    if let Some(g) = grad.as_deref_mut() {
                        for (tr, sign) in [(&ta, 1.0), (&tb, -1.0)] {
                            let mut seed = Seed::new(tr);
                            let d: Vec<f64> = diff.iter().map(|x| 2.0 * w * sign * x).collect();
                            let last = tr.len() - 1;
                            match target {
                                OlrTarget::RegressionOutput => seed.outputs[last] = d[0],
                                OlrTarget::Logits => {
                                    let v = self.vocab_size();
                                    seed.logits = vec![0.0; tr.len() * v];
                                    seed.logits[last * v..].copy_from_slice(&d);
                                }
                                OlrTarget::Hidden => seed.hidden = d,
                            }
                            self.backprop(tr, &seed, g);
                        }
                    }
                    diff.iter().map(|x| x * x).sum()
                }
            };
            report.total += w * value;
            report.terms.push(value);
        }
        Ok(report)
    }

    /// Accumulates into `grad` the gradient implied by `seed` through `trace`.
    fn backprop(&self, trace: &ForwardTrace, seed: &Seed, grad: &mut [f64]) {
        let cfg = self.config;
        let lay = &self.layout;
        let (hw, e, v) = (cfg.hidden_width, cfg.embed_width, self.vocab_size());
        let g = cfg.cell.gate_rows(hw);
        let t_len = trace.len();
        let top = cfg.layers - 1;
        let p = &self.params;

        // gradient flowing into the top hidden state from the heads
        let mut dh_ext = vec![0.0; t_len * hw];
        for t in 0..t_len {
            let id = trace.ids[t];
            let h_top = trace.hidden(top, t);
            let dh = &mut dh_ext[t * hw..(t + 1) * hw];
            let dy = seed.outputs[t];
            if dy != 0.0 {
                let draw = dy * self.output_scale;
                axpy(draw, h_top, &mut grad[lay.reg_c..lay.reg_c + hw]);
                axpy(draw, self.embedding(id), &mut grad[lay.reg_d..lay.reg_d + e]);
                grad[lay.reg_b] += draw;
                axpy(draw, &p[lay.reg_c..lay.reg_c + hw], dh);
                let reg_d = &p[lay.reg_d..lay.reg_d + e];
                axpy(draw, reg_d, &mut grad[id * e..(id + 1) * e]);
            }
            if !seed.logits.is_empty() {
                let dl = &seed.logits[t * v..(t + 1) * v];
                if dl.iter().any(|&x| x != 0.0) {
                    outer_acc(&mut grad[lay.tok_c..lay.tok_c + v * hw], dl, h_top);
                    outer_acc(&mut grad[lay.tok_d..lay.tok_d + v * e], dl, self.embedding(id));
                    axpy(1.0, dl, &mut grad[lay.tok_b..lay.tok_b + v]);
                    matvec_t_acc(&p[lay.tok_c..lay.tok_c + v * hw], dl, dh);
                    matvec_t_acc(&p[lay.tok_d..lay.tok_d + v * e], dl, &mut grad[id * e..(id + 1) * e]);
                }
            }
        }
        if !seed.hidden.is_empty() {
            axpy(1.0, &seed.hidden, &mut dh_ext[(t_len - 1) * hw..]);
        }

        let mut dz = vec![0.0; g];
        let mut xh = Vec::with_capacity(e.max(hw) + hw);
        for l in (0..cfg.layers).rev() {
            let ll = &lay.layers[l];
            let input = ll.input;
            let cols = input + hw;
            let w = &p[ll.weights..ll.weights + g * cols];
            let mut d_in = vec![0.0; t_len * input];
            let mut d_xh = vec![0.0; cols];
            let mut dh_rec = vec![0.0; hw];
            let mut dc_rec = vec![0.0; hw];
            let h_all = &trace.h[l];
            let act_all = &trace.act[l];
            for t in (0..t_len).rev() {
                let act = &act_all[t * g..(t + 1) * g];
                let dh: Vec<f64> = dh_ext[t * hw..(t + 1) * hw]
                    .iter()
                    .zip(&dh_rec)
                    .map(|(a, b)| a + b)
                    .collect();
                match cfg.cell {
                    CellKind::Vanilla => {
                        for k in 0..hw {
                            dz[k] = match cfg.activation {
                                Activation::Tanh => dh[k] * (1.0 - act[k] * act[k]),
                                Activation::Identity => dh[k],
                            };
                        }
                    }
                    CellKind::Lstm => {
                        let c = &trace.c[l];
                        for k in 0..hw {
                            let (i, f, gg, o) = (act[k], act[hw + k], act[2 * hw + k], act[3 * hw + k]);
                            let c_prev = c[t * hw + k];
                            let tc = c[(t + 1) * hw + k].tanh();
                            let dc = dc_rec[k] + dh[k] * o * (1.0 - tc * tc);
                            dz[k] = dc * gg * i * (1.0 - i);
                            dz[hw + k] = dc * c_prev * f * (1.0 - f);
                            dz[2 * hw + k] = dc * i * (1.0 - gg * gg);
                            dz[3 * hw + k] = dh[k] * tc * o * (1.0 - o);
                            dc_rec[k] = dc * f;
                        }
                    }
                }
                xh.clear();
                if l == 0 {
                    xh.extend_from_slice(self.embedding(trace.ids[t]));
                } else {
                    xh.extend_from_slice(trace.hidden(l - 1, t));
                }
                xh.extend_from_slice(&h_all[t * hw..(t + 1) * hw]);
                outer_acc(&mut grad[ll.weights..ll.weights + g * cols], &dz, &xh);
                axpy(1.0, &dz, &mut grad[ll.bias..ll.bias + g]);
                d_xh.iter_mut().for_each(|x| *x = 0.0);
                matvec_t_acc(w, &dz, &mut d_xh);
                d_in[t * input..(t + 1) * input].copy_from_slice(&d_xh[..input]);
                dh_rec.copy_from_slice(&d_xh[input..]);
            }
            if l == 0 {
                for (t, &id) in trace.ids.iter().enumerate() {
                    axpy(1.0, &d_in[t * e..(t + 1) * e], &mut grad[id * e..(id + 1) * e]);
                }
            } else {
                dh_ext = d_in;
            }
        }
    }
}
