//! Labeled sequence datasets built from random graphs.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, ExperimentConfig, GraphKind, PipelineError, Task, VocabChoice};
use crate::codec::{encode_indices, index_symbol, tokenize, TokenSequence, Vocabulary};
use crate::dfs::{sample_ordering_with, Ordering};
use crate::graph::{random_connected_graph_with, random_tree_with, Edge, Graph, GraphRecord};

/// One serialized graph. `target` is the Wiener index for regression tasks
/// and 0 for language modelling.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub graph_id: String,
    pub graph: Graph,
    pub ordering: Ordering,
    pub tokens: TokenSequence,
    pub ids: Vec<usize>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub vocab: Vocabulary,
    pub examples: Vec<Example>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

impl ExperimentConfig {
    /// Vocabulary implied by `vocab` and `n`.
    pub fn vocabulary(&self) -> Vocabulary {
        match self.vocab {
            VocabChoice::Anonymized => Vocabulary::anonymized(),
            VocabChoice::Labeled => {
                Vocabulary::labeled((0..self.n).map(|i| index_symbol(i).expect("n checked by validate")))
                    .expect("index symbols are valid")
            }
        }
    }

    /// Codec string and token ids of `ordering`, with node indices as symbols.
    pub fn serialize(&self, ordering: &Ordering, vocab: &Vocabulary) -> Result<(TokenSequence, Vec<usize>), PipelineError> {
        let tokens = encode_indices(ordering)?;
        let ids = tokenize(&tokens, vocab)?;
        Ok((tokens, ids))
    }
}

fn random_graph<R: Rng + ?Sized>(cfg: &ExperimentConfig, rng: &mut R) -> Result<Graph, PipelineError> {
    Ok(match cfg.graph_kind {
        GraphKind::Tree => random_tree_with(cfg.n, rng)?,
        GraphKind::General => random_connected_graph_with(cfg.n, cfg.extra_edges, rng)?,
    })
}

/// `count` random graphs of the configured kind with ids `<prefix>-<i>`.
pub fn generate_graphs(cfg: &ExperimentConfig, count: usize, prefix: &str, seed: u64) -> Result<Vec<GraphRecord>, PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            Ok(GraphRecord {
                id: format!("{prefix}-{i}"),
                graph: random_graph(cfg, &mut rng)?,
            })
        })
        .collect()
}

/// Train graphs, then test graphs whose edge sets differ from every train graph.
fn split_graphs(cfg: &ExperimentConfig) -> Result<(Vec<Graph>, Vec<Graph>), PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "data/graphs"));
    let train: Vec<Graph> = (0..cfg.train_size)
        .map(|_| random_graph(cfg, &mut rng))
        .collect::<Result<_, _>>()?;
    let seen: HashSet<Vec<Edge>> = train.iter().map(Graph::edges).collect();
    let budget = 100 * cfg.test_size + 1000;
    let mut test = Vec::with_capacity(cfg.test_size);
    let mut draws = 0;
    while test.len() < cfg.test_size {
        if draws == budget {
            return Err(PipelineError::Infeasible(format!(
                "could not draw {} test graphs disjoint from {} training graphs with n = {}",
                cfg.test_size, cfg.train_size, cfg.n
            )));
        }
        draws += 1;
        let g = random_graph(cfg, &mut rng)?;
        if !seen.contains(&g.edges()) {
            test.push(g);
        }
    }
    Ok((train, test))
}

fn label(
    cfg: &ExperimentConfig,
    vocab: &Vocabulary,
    graphs: Vec<Graph>,
    split: &str,
    with_target: bool,
) -> Result<Vec<Example>, PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &format!("data/orderings/{split}")));
    graphs
        .into_iter()
        .enumerate()
        .map(|(i, graph)| {
            let ordering = sample_ordering_with(&graph, None, &mut rng)?;
            let (tokens, ids) = cfg.serialize(&ordering, vocab)?;
            let target = if with_target { graph.wiener_index()? as f64 } else { 0.0 };
            Ok(Example {
                graph_id: format!("{split}-{i}"),
                graph,
                ordering,
                tokens,
                ids,
                target,
            })
        })
        .collect()
}

/// Examples for externally supplied graphs, keeping their ids. Targets are
/// computed for the regression task; orderings come from a seed derived from
/// `(cfg.seed, split)`.
pub fn dataset_from_graphs(cfg: &ExperimentConfig, graphs: &[GraphRecord], split: &str) -> Result<Dataset, PipelineError> {
    let vocab = cfg.vocabulary();
    let plain: Vec<Graph> = graphs.iter().map(|r| r.graph.clone()).collect();
    let mut examples = label(cfg, &vocab, plain, split, cfg.task == Task::WienerRegression)?;
    for (ex, rec) in examples.iter_mut().zip(graphs) {
        ex.graph_id = rec.id.clone();
    }
    Ok(Dataset { vocab, examples })
}

/// Random graphs serialized by one seeded DFS each, labeled with their
/// Wiener index. Deterministic in `cfg.seed`.
pub fn build_wiener_dataset(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset), PipelineError> {
    build(cfg, true)
}

/// Same graphs and serializations as the regression dataset, without targets.
pub fn build_tree_lm_dataset(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset), PipelineError> {
    build(cfg, false)
}

/// Dataset for `cfg.task`.
pub fn build_datasets(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset), PipelineError> {
    match cfg.task {
        Task::WienerRegression => build_wiener_dataset(cfg),
        Task::TreeLm => build_tree_lm_dataset(cfg),
    }
}

fn build(cfg: &ExperimentConfig, with_target: bool) -> Result<(Dataset, Dataset), PipelineError> {
    cfg.validate()?;
    let vocab = cfg.vocabulary();
    let (train, test) = split_graphs(cfg)?;
    let train = label(cfg, &vocab, train, "train", with_target)?;
    let test = label(cfg, &vocab, test, "test", with_target)?;
    Ok((
        Dataset {
            vocab: vocab.clone(),
            examples: train,
        },
        Dataset { vocab, examples: test },
    ))
}
