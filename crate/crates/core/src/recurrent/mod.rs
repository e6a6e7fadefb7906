//! Recurrent sequence models written from scratch: vanilla and LSTM cells,
//! regression and next-token heads, exact backpropagation through time, and
//! the orderless regularization loss.
//!
//! The recurrence is `h_t = f_u(h_{t-1}, x_t)` with `h_0 = 0`, where `x_t` is
//! the embedding of token `t`. For the vanilla cell `f_u = σ_h(A h + B x + b)`.
//! Both heads read the top hidden state and the current input,
//! `y_t = C h_t + D x_t + b`; the regression head additionally applies a
//! fixed affine calibration `shift + scale · y_t` so it can be fitted to
//! targets on any scale. The final output of a sequence is the head applied
//! at its last step.
//!
//! All parameters live in one flat `f64` buffer. Its fixed order, which is
//! also the checkpoint order, is:
//!
//! 1. embedding, `V × E` (row per token id)
//! 2. per layer `l`: weights `W_l`, `G × (I_l + H)`, then bias `G`. Columns
//!    `0..I_l` act on the layer input (`B`), the rest on the previous hidden
//!    state (`A`). `G = H` for vanilla and `4H` for LSTM with gate rows in
//!    the order input, forget, candidate, output.
//! 3. regression head: `C_r` (`H`), `D_r` (`E`), bias (1)
//! 4. next-token head: `C_t` (`V × H`), `D_t` (`V × E`), bias (`V`)

mod backward;
mod checkpoint;
mod linalg;
mod optim;
mod sample;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::Vocabulary;
use linalg::{matvec_acc, sigmoid};

pub use backward::{Gradients, LossReport, LossTerm, OlrTarget};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use optim::{sgd_step, Adam};
pub use sample::{sample_sequence, sample_sequence_with};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    IdOutOfRange { id: usize, vocab_size: usize },
    #[error("input sequence is empty")]
    EmptyInput,
    #[error("next-token loss needs at least 2 tokens, got {0}")]
    SequenceTooShort(usize),
    #[error("non-finite gradient (norm {0})")]
    NonFiniteGradient(f64),
    #[error("gradient has {actual} entries, model has {expected}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("max_len must be at least 1")]
    MaxLenTooSmall,
    #[error("invalid model configuration: {0}")]
    BadConfig(String),
    #[error("checkpoint line {line}: {message}")]
    Checkpoint { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Vanilla,
    Lstm,
}

impl CellKind {
    pub fn name(self) -> &'static str {
        match self {
            CellKind::Vanilla => "vanilla",
            CellKind::Lstm => "lstm",
        }
    }

    pub fn parse(s: &str) -> Option<CellKind> {
        match s {
            "vanilla" => Some(CellKind::Vanilla),
            "lstm" => Some(CellKind::Lstm),
            _ => None,
        }
    }

    fn gate_rows(self, hidden: usize) -> usize {
        match self {
            CellKind::Vanilla => hidden,
            CellKind::Lstm => 4 * hidden,
        }
    }
}

/// Hidden nonlinearity σ_h of the vanilla cell. LSTM gates are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Activation> {
        match s {
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub cell: CellKind,
    pub hidden_width: usize,
    pub embed_width: usize,
    pub layers: usize,
    pub activation: Activation,
}

impl ModelConfig {
    pub fn lstm(hidden_width: usize, embed_width: usize) -> ModelConfig {
        ModelConfig {
            cell: CellKind::Lstm,
            hidden_width,
            embed_width,
            layers: 1,
            activation: Activation::Tanh,
        }
    }

    pub fn vanilla(hidden_width: usize, embed_width: usize) -> ModelConfig {
        ModelConfig {
            cell: CellKind::Vanilla,
            ..ModelConfig::lstm(hidden_width, embed_width)
        }
    }

    pub fn with_layers(self, layers: usize) -> ModelConfig {
        ModelConfig { layers, ..self }
    }

    pub fn with_activation(self, activation: Activation) -> ModelConfig {
        ModelConfig { activation, ..self }
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.hidden_width == 0 || self.embed_width == 0 || self.layers == 0 {
            return Err(ModelError::BadConfig(
                "hidden width, embedding width and layer count must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Named parameter blocks, in buffer order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamBlock {
    Embedding,
    CellWeights(usize),
    CellBias(usize),
    RegressionC,
    RegressionD,
    RegressionBias,
    TokenC,
    TokenD,
    TokenBias,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct LayerLayout {
    input: usize,
    weights: usize,
    bias: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Layout {
    layers: Vec<LayerLayout>,
    reg_c: usize,
    reg_d: usize,
    reg_b: usize,
    tok_c: usize,
    tok_d: usize,
    tok_b: usize,
    total: usize,
}

impl Layout {
    fn new(cfg: &ModelConfig, vocab_size: usize) -> Layout {
        let (h, e, v) = (cfg.hidden_width, cfg.embed_width, vocab_size);
        let g = cfg.cell.gate_rows(h);
        let mut at = v * e;
        let mut layers = Vec::with_capacity(cfg.layers);
        for l in 0..cfg.layers {
            let input = if l == 0 { e } else { h };
            let weights = at;
            at += g * (input + h);
            let bias = at;
            at += g;
            layers.push(LayerLayout { input, weights, bias });
        }
        let reg_c = at;
        let reg_d = reg_c + h;
        let reg_b = reg_d + e;
        let tok_c = reg_b + 1;
        let tok_d = tok_c + v * h;
        let tok_b = tok_d + v * e;
        Layout {
            layers,
            reg_c,
            reg_d,
            reg_b,
            tok_c,
            tok_d,
            tok_b,
            total: tok_b + v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentModel {
    config: ModelConfig,
    vocab: Vocabulary,
    layout: Layout,
    params: Vec<f64>,
    output_shift: f64,
    output_scale: f64,
}

impl RecurrentModel {
    /// All parameters zero.
    pub fn zeros(config: ModelConfig, vocab: Vocabulary) -> Result<RecurrentModel, ModelError> {
        config.validate()?;
        let layout = Layout::new(&config, vocab.size());
        Ok(RecurrentModel {
            params: vec![0.0; layout.total],
            config,
            vocab,
            layout,
            output_shift: 0.0,
            output_scale: 1.0,
        })
    }

    /// Every block uniform in `[-1/√fan_in, 1/√fan_in]`; biases use their
    /// block's fan-in and the embedding table has fan-in 1.
    pub fn new(config: ModelConfig, vocab: Vocabulary, seed: u64) -> Result<RecurrentModel, ModelError> {
        let mut model = RecurrentModel::zeros(config, vocab)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (h, e) = (config.hidden_width, config.embed_width);
        let mut fill = |model: &mut RecurrentModel, block: ParamBlock, fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in model.block_mut(block) {
                *p = rng.gen_range(-bound..=bound);
            }
        };
        fill(&mut model, ParamBlock::Embedding, 1);
        for l in 0..config.layers {
            let fan_in = model.layout.layers[l].input + h;
            fill(&mut model, ParamBlock::CellWeights(l), fan_in);
            fill(&mut model, ParamBlock::CellBias(l), fan_in);
        }
        for block in [
            ParamBlock::RegressionC,
            ParamBlock::RegressionD,
            ParamBlock::RegressionBias,
            ParamBlock::TokenC,
            ParamBlock::TokenD,
            ParamBlock::TokenBias,
        ] {
            fill(&mut model, block, h + e);
        }
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.size()
    }

    pub fn param_count(&self) -> usize {
        self.layout.total
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Regression calibration `(shift, scale)`; not trained.
    pub fn output_calibration(&self) -> (f64, f64) {
        (self.output_shift, self.output_scale)
    }

    pub fn set_output_calibration(&mut self, shift: f64, scale: f64) {
        self.output_shift = shift;
        self.output_scale = scale;
    }

    fn block_range(&self, block: ParamBlock) -> std::ops::Range<usize> {
        let lay = &self.layout;
        let (h, e, v) = (self.config.hidden_width, self.config.embed_width, self.vocab.size());
        let g = self.config.cell.gate_rows(h);
        let (start, len) = match block {
            ParamBlock::Embedding => (0, v * e),
            ParamBlock::CellWeights(l) => (lay.layers[l].weights, g * (lay.layers[l].input + h)),
            ParamBlock::CellBias(l) => (lay.layers[l].bias, g),
            ParamBlock::RegressionC => (lay.reg_c, h),
            ParamBlock::RegressionD => (lay.reg_d, e),
            ParamBlock::RegressionBias => (lay.reg_b, 1),
            ParamBlock::TokenC => (lay.tok_c, v * h),
            ParamBlock::TokenD => (lay.tok_d, v * e),
            ParamBlock::TokenBias => (lay.tok_b, v),
        };
        start..start + len
    }

    pub fn block(&self, block: ParamBlock) -> &[f64] {
        &self.params[self.block_range(block)]
    }

    pub fn block_mut(&mut self, block: ParamBlock) -> &mut [f64] {
        let r = self.block_range(block);
        &mut self.params[r]
    }

    fn embedding(&self, id: usize) -> &[f64] {
        let e = self.config.embed_width;
        &self.params[id * e..(id + 1) * e]
    }

    fn check_ids(&self, ids: &[usize]) -> Result<(), ModelError> {
        if ids.is_empty() {
            return Err(ModelError::EmptyInput);
        }
        let v = self.vocab.size();
        match ids.iter().find(|&&id| id >= v) {
            Some(&id) => Err(ModelError::IdOutOfRange { id, vocab_size: v }),
            None => Ok(()),
        }
    }

    /// One cell update. `xh` holds `[input; h_prev]`; writes the gate
    /// activations, the new hidden state and (LSTM) the new cell state.
    fn cell_step(&self, layer: usize, xh: &[f64], c_prev: &[f64], act: &mut [f64], h: &mut [f64], c: &mut [f64]) {
        let hw = self.config.hidden_width;
        let lay = &self.layout.layers[layer];
        let g = act.len();
        act.copy_from_slice(&self.params[lay.bias..lay.bias + g]);
        let w = &self.params[lay.weights..lay.weights + g * xh.len()];
        matvec_acc(w, xh, act);
        match self.config.cell {
            CellKind::Vanilla => {
                if self.config.activation == Activation::Tanh {
                    act.iter_mut().for_each(|a| *a = a.tanh());
                }
                h.copy_from_slice(act);
            }
            CellKind::Lstm => {
                let (ifg, o) = act.split_at_mut(3 * hw);
                let (i_f, gg) = ifg.split_at_mut(2 * hw);
                i_f.iter_mut().for_each(|a| *a = sigmoid(*a));
                gg.iter_mut().for_each(|a| *a = a.tanh());
                o.iter_mut().for_each(|a| *a = sigmoid(*a));
                for k in 0..hw {
                    c[k] = act[hw + k] * c_prev[k] + act[k] * act[2 * hw + k];
                    h[k] = act[3 * hw + k] * c[k].tanh();
                }
            }
        }
    }

    fn heads(&self, h_top: &[f64], x: &[f64], logits: &mut [f64]) -> f64 {
        let lay = &self.layout;
        let (hw, e, v) = (self.config.hidden_width, self.config.embed_width, self.vocab.size());
        let raw = linalg::dot(&self.params[lay.reg_c..lay.reg_c + hw], h_top)
            + linalg::dot(&self.params[lay.reg_d..lay.reg_d + e], x)
            + self.params[lay.reg_b];
        logits.copy_from_slice(&self.params[lay.tok_b..lay.tok_b + v]);
        matvec_acc(&self.params[lay.tok_c..lay.tok_c + v * hw], h_top, logits);
        matvec_acc(&self.params[lay.tok_d..lay.tok_d + v * e], x, logits);
        self.output_shift + self.output_scale * raw
    }

    /// Runs the recurrence over `ids` and keeps every intermediate value.
    pub fn forward(&self, ids: &[usize]) -> Result<ForwardTrace, ModelError> {
        self.check_ids(ids)?;
        let (hw, v) = (self.config.hidden_width, self.vocab.size());
        let g = self.config.cell.gate_rows(hw);
        let t_len = ids.len();
        let lstm = self.config.cell == CellKind::Lstm;
        let mut trace = ForwardTrace {
            ids: ids.to_vec(),
            hidden_width: hw,
            vocab_size: v,
            h: vec![vec![0.0; (t_len + 1) * hw]; self.config.layers],
            c: vec![if lstm { vec![0.0; (t_len + 1) * hw] } else { Vec::new() }; self.config.layers],
            act: vec![vec![0.0; t_len * g]; self.config.layers],
            outputs: vec![0.0; t_len],
            logits: vec![0.0; t_len * v],
        };
        let mut xh = Vec::with_capacity(self.config.embed_width.max(hw) + hw);
        let mut dummy = Vec::new();
        for (t, &id) in ids.iter().enumerate() {
            for l in 0..self.config.layers {
                xh.clear();
                if l == 0 {
                    xh.extend_from_slice(self.embedding(id));
                } else {
                    xh.extend_from_slice(&trace.h[l - 1][(t + 1) * hw..(t + 2) * hw]);
                }
                let (h_prev, h_rest) = trace.h[l].split_at_mut((t + 1) * hw);
                xh.extend_from_slice(&h_prev[t * hw..]);
                let act = &mut trace.act[l][t * g..(t + 1) * g];
                if lstm {
                    let (c_prev, c_rest) = trace.c[l].split_at_mut((t + 1) * hw);
                    self.cell_step(l, &xh, &c_prev[t * hw..], act, &mut h_rest[..hw], &mut c_rest[..hw]);
                } else {
                    self.cell_step(l, &xh, &[], act, &mut h_rest[..hw], &mut dummy);
                }
            }
            let top = &trace.h[self.config.layers - 1][(t + 1) * hw..(t + 2) * hw];
            trace.outputs[t] = self.heads(top, self.embedding(id), &mut trace.logits[t * v..(t + 1) * v]);
        }
        Ok(trace)
    }

    /// Final regression output of `ids`.
    pub fn predict(&self, ids: &[usize]) -> Result<f64, ModelError> {
        let mut state = self.initial_state();
        let mut out = 0.0;
        self.check_ids(ids)?;
        for &id in ids {
            out = self.step(&mut state, id)?.regression;
        }
        Ok(out)
    }

    pub fn initial_state(&self) -> RecurrentState {
        let hw = self.config.hidden_width;
        let lstm = self.config.cell == CellKind::Lstm;
        RecurrentState {
            h: vec![vec![0.0; hw]; self.config.layers],
            c: vec![if lstm { vec![0.0; hw] } else { Vec::new() }; self.config.layers],
        }
    }

    /// Advances `state` by one token and returns both head outputs.
    /// Produces the same values as [`RecurrentModel::forward`].
    pub fn step(&self, state: &mut RecurrentState, id: usize) -> Result<StepOutput, ModelError> {
        self.check_ids(&[id])?;
        let hw = self.config.hidden_width;
        let g = self.config.cell.gate_rows(hw);
        let mut act = vec![0.0; g];
        let mut xh = Vec::with_capacity(self.config.embed_width.max(hw) + hw);
        for l in 0..self.config.layers {
            xh.clear();
            if l == 0 {
                xh.extend_from_slice(self.embedding(id));
            } else {
                xh.extend_from_slice(&state.h[l - 1]);
            }
            xh.extend_from_slice(&state.h[l]);
            let c_prev = state.c[l].clone();
            self.cell_step(l, &xh, &c_prev, &mut act, &mut state.h[l], &mut state.c[l]);
        }
        let mut logits = vec![0.0; self.vocab.size()];
        let regression = self.heads(&state.h[self.config.layers - 1], self.embedding(id), &mut logits);
        Ok(StepOutput { regression, logits })
    }
}

/// Hidden (and LSTM cell) state of every layer between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentState {
    h: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
}

impl RecurrentState {
    pub fn hidden(&self, layer: usize) -> &[f64] {
        &self.h[layer]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub regression: f64,
    pub logits: Vec<f64>,
}

/// Every intermediate value of one forward pass. Step `t` (0-based) is the
/// state after consuming `ids[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    ids: Vec<usize>,
    hidden_width: usize,
    vocab_size: usize,
    /// Per layer, `(T + 1) × H`; row 0 is `h_0`.
    h: Vec<Vec<f64>>,
    /// Per layer, `(T + 1) × H`; empty for vanilla cells.
    c: Vec<Vec<f64>>,
    /// Per layer, `T × G` post-nonlinearity gate values.
    act: Vec<Vec<f64>>,
    outputs: Vec<f64>,
    logits: Vec<f64>,
}

impl ForwardTrace {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn hidden(&self, layer: usize, t: usize) -> &[f64] {
        let hw = self.hidden_width;
        &self.h[layer][(t + 1) * hw..(t + 2) * hw]
    }

    /// LSTM cell state; empty for vanilla cells.
    pub fn cell_state(&self, layer: usize, t: usize) -> &[f64] {
        let hw = self.hidden_width;
        self.c[layer].get((t + 1) * hw..(t + 2) * hw).unwrap_or(&[])
    }

    pub fn output(&self, t: usize) -> f64 {
        self.outputs[t]
    }

    pub fn logits(&self, t: usize) -> &[f64] {
        &self.logits[t * self.vocab_size..(t + 1) * self.vocab_size]
    }

    pub fn final_output(&self) -> f64 {
        self.outputs[self.len() - 1]
    }

    pub fn final_logits(&self) -> &[f64] {
        self.logits(self.len() - 1)
    }

    /// Top-layer hidden state after the last token.
    pub fn final_hidden(&self) -> &[f64] {
        self.hidden(self.h.len() - 1, self.len() - 1)
    }
}
