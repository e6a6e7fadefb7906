//! Drawing the two sequences that feed one orderless loss term.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ExperimentConfig, PairSource, PipelineError, TrajectoryRecord};
use crate::codec::Vocabulary;
use crate::dfs::{common_end_pair_any, sample_dfs_induced_subgraph_with, sample_ordering_with, Ordering};
use crate::graph::Graph;

/// Where a pair comes from.
#[derive(Debug, Clone, Copy)]
pub enum PairInput<'a> {
    /// Two distinct stored trajectories.
    Record(&'a TrajectoryRecord),
    /// A fresh pair on the graph, per `ExperimentConfig::pair_source`.
    Graph(&'a Graph),
}

/// Uniform pair of distinct stored trajectories, in random order.
pub fn sample_record_pair<R: Rng + ?Sized>(
    record: &TrajectoryRecord,
    rng: &mut R,
) -> Result<(Ordering, Ordering), PipelineError> {
    let trajs = record.trajectories();
    if trajs.len() < 2 {
        return Err(PipelineError::NotEnoughTrajectories(record.graph_id().to_string()));
    }
    let picked = index::sample(rng, trajs.len(), 2);
    Ok((trajs[picked.index(0)].clone(), trajs[picked.index(1)].clone()))
}

/// Random DFS runs drawn while looking for a second ordering with the same end.
const REJECTION_DRAWS: usize = 64;

/// Two distinct random DFS orderings of `g` with the same last node, or `None`
/// if `REJECTION_DRAWS` runs produce no match for the first one.
fn rejection_pair<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Result<Option<(Ordering, Ordering)>, PipelineError> {
    let first = sample_ordering_with(g, None, rng)?;
    for _ in 0..REJECTION_DRAWS {
        let second = sample_ordering_with(g, None, rng)?;
        if second.last() == first.last() && second != first {
            return Ok(Some((first, second)));
        }
    }
    Ok(None)
}

/// Samples a DFS-induced subgraph of `g` and two distinct orderings of it that
/// end at the same node, resampling the subgraph up to `retries` times.
///
/// The pair comes from rejection sampling over random DFS runs, which reaches
/// every common-end pair; the cut constructions are the fallback when no
/// match turns up. The orderings use the original node indices of `g`.
pub fn sample_subgraph_pair<R: Rng + ?Sized>(
    g: &Graph,
    retries: usize,
    rng: &mut R,
) -> Result<(Ordering, Ordering), PipelineError> {
    for _ in 0..retries {
        let sub = sample_dfs_induced_subgraph_with(g, rng)?;
        let pair = match rejection_pair(&sub.subgraph, rng)? {
            Some(pair) => Some(pair),
            None => common_end_pair_any(&sub.subgraph, rng.gen())
                .ok()
                .map(|p| (p.first().clone(), p.second().clone())),
        };
        if let Some((a, b)) = pair {
            return Ok((a.map_nodes(&sub.node_map), b.map_nodes(&sub.node_map)));
        }
    }
    Err(PipelineError::RetriesExhausted(retries))
}

/// Orderings of one pair before tokenization.
pub(crate) fn sample_pair_orderings<R: Rng + ?Sized>(
    input: PairInput<'_>,
    cfg: &ExperimentConfig,
    rng: &mut R,
) -> Result<(Ordering, Ordering), PipelineError> {
    match input {
        PairInput::Record(record) => sample_record_pair(record, rng),
        PairInput::Graph(g) => match cfg.pair_source {
            PairSource::DfsSubgraph => sample_subgraph_pair(g, cfg.pair_retries, rng),
            PairSource::FullGraph => {
                let pair = common_end_pair_any(g, rng.gen())?;
                Ok((pair.first().clone(), pair.second().clone()))
            }
        },
    }
}

/// Token ids of a sampled pair, serialized like dataset examples.
pub fn sample_olr_pair(
    input: PairInput<'_>,
    cfg: &ExperimentConfig,
    vocab: &Vocabulary,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = sample_pair_orderings(input, cfg, &mut rng)?;
    Ok((cfg.serialize(&a, vocab)?.1, cfg.serialize(&b, vocab)?.1))
}
