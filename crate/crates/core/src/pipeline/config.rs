//! Flat `key = value` experiment configuration. Every key has a default,
//! unknown keys are errors, `#` starts a comment line.

use std::fmt::Write as _;

use super::PipelineError;
use crate::recurrent::{Activation, CellKind, ModelConfig, OlrTarget};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    WienerRegression,
    TreeLm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// Uniform random labeled trees.
    Tree,
    /// A random tree plus `extra_edges` random non-tree edges.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OlrMode {
    /// Compare the head output: the regression scalar or the final logits.
    Output,
    /// Compare the top hidden state.
    Hidden,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSource {
    /// Pairs drawn from precomputed trajectory sets of the whole graph.
    FullGraph,
    /// A fresh DFS-induced subgraph, then a common-end pair on it.
    DfsSubgraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LrSchedule {
    Constant,
    /// Half-cosine from `learning_rate` down to 0 at the epoch budget.
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VocabChoice {
    /// Node tokens carry no identity.
    Anonymized,
    /// Node tokens are node indices.
    Labeled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub graph_kind: GraphKind,
    pub n: usize,
    pub extra_edges: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub vocab: VocabChoice,
    pub cell: CellKind,
    pub hidden_width: usize,
    pub embed_width: usize,
    pub layers: usize,
    pub lambda: f64,
    pub olr_mode: OlrMode,
    pub pair_source: PairSource,
    pub trajectories: usize,
    pub pair_retries: usize,
    pub epochs: usize,
    pub plateau_window: usize,
    pub plateau_tolerance: f64,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub lr_schedule: LrSchedule,
    pub clip_norm: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub oracle_max_nodes: usize,
    pub sample_count: usize,
    pub unique_k: Vec<usize>,
    pub max_len: usize,
    pub temperature: f64,
}

/// Every accepted key with its default value and meaning.
pub const CONFIG_KEYS: &[(&str, &str, &str)] = &[
    ("task", "wiener_regression", "wiener_regression | tree_lm"),
    ("graph_kind", "tree", "tree | general"),
    ("n", "10", "nodes per graph"),
    ("extra_edges", "3", "non-tree edges per graph when graph_kind = general"),
    ("train_size", "50", "training graphs"),
    ("test_size", "200", "test graphs, disjoint from training graphs"),
    ("vocab", "anonymized", "anonymized | labeled (node index symbols)"),
    ("cell", "lstm", "lstm | vanilla"),
    ("hidden_width", "100", "recurrent state width"),
    ("embed_width", "16", "token embedding width"),
    ("layers", "1", "stacked recurrent layers"),
    ("lambda", "1.0", "weight of the orderless loss; 0 trains the plain baseline"),
    ("olr_mode", "output", "output | hidden"),
    ("pair_source", "full_graph", "full_graph | dfs_subgraph"),
    ("trajectories", "10", "trajectories per graph for full_graph pairs"),
    ("pair_retries", "20", "subgraph resamples before a dfs_subgraph pair is given up"),
    ("epochs", "500", "hard epoch budget"),
    ("plateau_window", "50", "epochs without loss improvement that count as a plateau"),
    ("plateau_tolerance", "0.01", "relative improvement below which the loss counts as flat"),
    ("optimizer", "adam", "adam | sgd"),
    ("learning_rate", "0.01", "initial step size"),
    ("lr_schedule", "cosine", "constant | cosine (decays to 0 at the epoch budget)"),
    ("clip_norm", "5.0", "global gradient norm clip; 0 disables"),
    ("batch_size", "10", "examples per update"),
    ("seed", "1", "master seed; every other seed is derived from it"),
    ("oracle_max_nodes", "8", "node bound for exhaustive oracles"),
    ("sample_count", "1000", "generated sequences for generation metrics"),
    ("unique_k", "100,1000", "comma-separated K values for unique@K"),
    ("max_len", "200", "maximum generated tokens after BOS"),
    ("temperature", "1.0", "sampling temperature; 0 is greedy"),
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut cfg = ExperimentConfig {
            task: Task::WienerRegression,
            graph_kind: GraphKind::Tree,
            n: 0,
            extra_edges: 0,
            train_size: 0,
            test_size: 0,
            vocab: VocabChoice::Anonymized,
            cell: CellKind::Lstm,
            hidden_width: 0,
            embed_width: 0,
            layers: 0,
            lambda: 0.0,
            olr_mode: OlrMode::Output,
            pair_source: PairSource::FullGraph,
            trajectories: 0,
            pair_retries: 0,
            epochs: 0,
            plateau_window: 0,
            plateau_tolerance: 0.0,
            optimizer: OptimizerKind::Adam,
            learning_rate: 0.0,
            lr_schedule: LrSchedule::Constant,
            clip_norm: 0.0,
            batch_size: 0,
            seed: 0,
            oracle_max_nodes: 0,
            sample_count: 0,
            unique_k: Vec::new(),
            max_len: 0,
            temperature: 0.0,
        };
        for (key, value, _) in CONFIG_KEYS {
            cfg.set(key, value).expect("defaults parse");
        }
        cfg
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad value `{value}` for `{key}`"))
}

fn parse_choice<T: Copy>(key: &str, value: &str, choices: &[(&str, T)]) -> Result<T, String> {
    choices
        .iter()
        .find(|(name, _)| *name == value)
        .map(|&(_, v)| v)
        .ok_or_else(|| {
            let names: Vec<&str> = choices.iter().map(|(n, _)| *n).collect();
            format!("`{key}` must be one of {}", names.join(", "))
        })
}

impl ExperimentConfig {
    /// Sets one key. `Ok(false)` means the key is unknown.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool, String> {
        let v = value.trim();
        match key {
            "task" => {
                self.task = parse_choice(key, v, &[("wiener_regression", Task::WienerRegression), ("tree_lm", Task::TreeLm)])?
            }
            "graph_kind" => self.graph_kind = parse_choice(key, v, &[("tree", GraphKind::Tree), ("general", GraphKind::General)])?,
            "n" => self.n = parse_num(key, v)?,
            "extra_edges" => self.extra_edges = parse_num(key, v)?,
            "train_size" => self.train_size = parse_num(key, v)?,
            "test_size" => self.test_size = parse_num(key, v)?,
            "vocab" => {
                self.vocab = parse_choice(key, v, &[("anonymized", VocabChoice::Anonymized), ("labeled", VocabChoice::Labeled)])?
            }
            "cell" => self.cell = CellKind::parse(v).ok_or_else(|| format!("`{key}` must be lstm or vanilla"))?,
            "hidden_width" => self.hidden_width = parse_num(key, v)?,
            "embed_width" => self.embed_width = parse_num(key, v)?,
            "layers" => self.layers = parse_num(key, v)?,
            "lambda" => self.lambda = parse_num(key, v)?,
            "olr_mode" => self.olr_mode = parse_choice(key, v, &[("output", OlrMode::Output), ("hidden", OlrMode::Hidden)])?,
            "pair_source" => {
                self.pair_source = parse_choice(
                    key,
                    v,
                    &[("full_graph", PairSource::FullGraph), ("dfs_subgraph", PairSource::DfsSubgraph)],
                )?
            }
            "trajectories" => self.trajectories = parse_num(key, v)?,
            "pair_retries" => self.pair_retries = parse_num(key, v)?,
            "epochs" => self.epochs = parse_num(key, v)?,
            "plateau_window" => self.plateau_window = parse_num(key, v)?,
            "plateau_tolerance" => self.plateau_tolerance = parse_num(key, v)?,
            "optimizer" => {
                self.optimizer = parse_choice(key, v, &[("adam", OptimizerKind::Adam), ("sgd", OptimizerKind::Sgd)])?
            }
            "learning_rate" => self.learning_rate = parse_num(key, v)?,
            "lr_schedule" => {
                self.lr_schedule = parse_choice(key, v, &[("constant", LrSchedule::Constant), ("cosine", LrSchedule::Cosine)])?
            }
            "clip_norm" => self.clip_norm = parse_num(key, v)?,
            "batch_size" => self.batch_size = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "oracle_max_nodes" => self.oracle_max_nodes = parse_num(key, v)?,
            "sample_count" => self.sample_count = parse_num(key, v)?,
            "unique_k" => {
                self.unique_k = v
                    .split(',')
                    .map(|k| parse_num(key, k.trim()))
                    .collect::<Result<Vec<usize>, String>>()?
            }
            "max_len" => self.max_len = parse_num(key, v)?,
            "temperature" => self.temperature = parse_num(key, v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Parses a config file on top of the defaults and validates the result.
    pub fn parse(text: &str) -> Result<ExperimentConfig, PipelineError> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(PipelineError::Config {
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            match cfg.set(key, value) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(PipelineError::UnknownKey {
                        line: i + 1,
                        key: key.to_string(),
                    })
                }
                Err(message) => return Err(PipelineError::Config { line: i + 1, message }),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |message: &str| {
            Err(PipelineError::Config {
                line: 0,
                message: message.to_string(),
            })
        };
        let positive = [
            ("n", self.n),
            ("train_size", self.train_size),
            ("test_size", self.test_size),
            ("hidden_width", self.hidden_width),
            ("embed_width", self.embed_width),
            ("layers", self.layers),
            ("trajectories", self.trajectories),
            ("pair_retries", self.pair_retries),
            ("epochs", self.epochs),
            ("plateau_window", self.plateau_window),
            ("batch_size", self.batch_size),
            ("oracle_max_nodes", self.oracle_max_nodes),
            ("sample_count", self.sample_count),
            ("max_len", self.max_len),
        ];
        if let Some((key, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return bad(&format!("`{key}` must be positive"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("`lambda` must be finite and non-negative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("`learning_rate` must be positive");
        }
        if !(self.clip_norm >= 0.0) || !(self.plateau_tolerance >= 0.0) || !(self.temperature >= 0.0) {
            return bad("`clip_norm`, `plateau_tolerance` and `temperature` must be non-negative");
        }
        if self.unique_k.is_empty() || self.unique_k.contains(&0) {
            return bad("`unique_k` needs positive values");
        }
        if self.vocab == VocabChoice::Labeled && self.n > 62 {
            return bad("labeled vocabularies support at most 62 nodes");
        }
        Ok(())
    }

    /// Renders every key in `CONFIG_KEYS` order; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, _, _) in CONFIG_KEYS {
            let _ = writeln!(out, "{key} = {}", self.value_of(key));
        }
        out
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "task" => match self.task {
                Task::WienerRegression => "wiener_regression",
                Task::TreeLm => "tree_lm",
            }
            .into(),
            "graph_kind" => match self.graph_kind {
                GraphKind::Tree => "tree",
                GraphKind::General => "general",
            }
            .into(),
            "n" => self.n.to_string(),
            "extra_edges" => self.extra_edges.to_string(),
            "train_size" => self.train_size.to_string(),
            "test_size" => self.test_size.to_string(),
            "vocab" => match self.vocab {
                VocabChoice::Anonymized => "anonymized",
                VocabChoice::Labeled => "labeled",
            }
            .into(),
            "cell" => self.cell.name().into(),
            "hidden_width" => self.hidden_width.to_string(),
            "embed_width" => self.embed_width.to_string(),
            "layers" => self.layers.to_string(),
            "lambda" => format!("{:?}", self.lambda),
            "olr_mode" => match self.olr_mode {
                OlrMode::Output => "output",
                OlrMode::Hidden => "hidden",
            }
            .into(),
            "pair_source" => match self.pair_source {
                PairSource::FullGraph => "full_graph",
                PairSource::DfsSubgraph => "dfs_subgraph",
            }
            .into(),
            "trajectories" => self.trajectories.to_string(),
            "pair_retries" => self.pair_retries.to_string(),
            "epochs" => self.epochs.to_string(),
            "plateau_window" => self.plateau_window.to_string(),
            "plateau_tolerance" => format!("{:?}", self.plateau_tolerance),
            "optimizer" => match self.optimizer {
                OptimizerKind::Adam => "adam",
                OptimizerKind::Sgd => "sgd",
            }
            .into(),
            "learning_rate" => format!("{:?}", self.learning_rate),
            "lr_schedule" => match self.lr_schedule {
                LrSchedule::Constant => "constant",
                LrSchedule::Cosine => "cosine",
            }
            .into(),
            "clip_norm" => format!("{:?}", self.clip_norm),
            "batch_size" => self.batch_size.to_string(),
            "seed" => self.seed.to_string(),
            "oracle_max_nodes" => self.oracle_max_nodes.to_string(),
            "sample_count" => self.sample_count.to_string(),
            "unique_k" => self.unique_k.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
            "max_len" => self.max_len.to_string(),
            "temperature" => format!("{:?}", self.temperature),
            _ => unreachable!("every listed key is rendered"),
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            cell: self.cell,
            hidden_width: self.hidden_width,
            embed_width: self.embed_width,
            layers: self.layers,
            activation: Activation::Tanh,
        }
    }

    pub fn olr_target(&self) -> OlrTarget {
        match (self.olr_mode, self.task) {
            (OlrMode::Hidden, _) => OlrTarget::Hidden,
            (OlrMode::Output, Task::WienerRegression) => OlrTarget::RegressionOutput,
            (OlrMode::Output, Task::TreeLm) => OlrTarget::Logits,
        }
    }

    pub fn clip(&self) -> Option<f64> {
        (self.clip_norm > 0.0).then_some(self.clip_norm)
    }

    /// Step size used during `epoch` (1-based).
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        match self.lr_schedule {
            LrSchedule::Constant => self.learning_rate,
            LrSchedule::Cosine => {
                let progress = (epoch - 1) as f64 / self.epochs as f64;
                0.5 * self.learning_rate * (1.0 + (std::f64::consts::PI * progress).cos())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_documented_and_valid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.n, 10);
        assert_eq!((cfg.train_size, cfg.test_size), (50, 200));
        assert_eq!(cfg.hidden_width, 100);
        assert_eq!(cfg.lambda, 1.0);
        assert_eq!(cfg.olr_target(), OlrTarget::RegressionOutput);
        assert_eq!(ExperimentConfig::parse("").unwrap(), cfg);
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.lambda = 0.1;
        cfg.task = Task::TreeLm;
        cfg.unique_k = vec![5, 50];
        cfg.lr_schedule = LrSchedule::Constant;
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn cosine_schedule_endpoints() {
        let mut cfg = ExperimentConfig {
            epochs: 4,
            learning_rate: 0.1,
            lr_schedule: LrSchedule::Constant,
            ..ExperimentConfig::default()
        };
        assert_eq!(cfg.learning_rate_at(3), 0.1);
        cfg.lr_schedule = LrSchedule::Cosine;
        assert_eq!(cfg.learning_rate_at(1), 0.1);
        assert!((cfg.learning_rate_at(3) - 0.05).abs() < 1e-15);
        assert!(cfg.learning_rate_at(4) < cfg.learning_rate_at(3) && cfg.learning_rate_at(4) > 0.0);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = ExperimentConfig::parse("n = 5\n# fine\nwidth = 3\n").unwrap_err();
        assert!(matches!(err, PipelineError::UnknownKey { line: 3, ref key } if key == "width"));
        let err = ExperimentConfig::parse("lambda = lots").unwrap_err();
        assert!(matches!(err, PipelineError::Config { line: 1, .. }));
        assert!(ExperimentConfig::parse("no equals sign").is_err());
        assert!(ExperimentConfig::parse("lambda = -1").is_err());
        assert!(ExperimentConfig::parse("train_size = 0").is_err());
    }
}
