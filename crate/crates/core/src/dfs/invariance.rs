//! Exhaustive measurement of how far a model is from total structure
//! invariance on one small graph.

use std::collections::{BTreeMap, HashMap};

use super::enumerate::{dfs_induced_node_sets, enumerate_orderings};
use super::{OrderError, Ordering};
use crate::codec::{encode_labeled, tokenize, CodecError};
use crate::graph::Graph;
use crate::recurrent::{ModelError, OlrTarget, RecurrentModel};

#[derive(Debug, thiserror::Error)]
pub enum InvarianceError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Largest squared distance between the model's final representations of two
/// orderings that share an end vertex, over every DFS-induced subgraph of `g`.
///
/// Sequences are serialized with the codec and tokenized with the model's
/// vocabulary. Zero means the model is totally structure invariant on `g`.
pub fn structure_invariance_gap(
    model: &RecurrentModel,
    g: &Graph,
    target: OlrTarget,
    bound: usize,
) -> Result<f64, InvarianceError> {
    let sets = dfs_induced_node_sets(g, bound)?;
    let mut cache: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    let mut gap: f64 = 0.0;
    for set in sets.iter().filter(|s| s.len() >= 2) {
        let (sub, _) = g.induced_subgraph(set);
        let mut by_end: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        for seq in enumerate_orderings(&sub, bound)? {
            by_end.entry(*seq.last().expect("non-empty")).or_default().push(seq);
        }
        for group in by_end.values().filter(|group| group.len() >= 2) {
            let mut reps = Vec::with_capacity(group.len());
            for seq in group {
                let ordering = Ordering::from_sequence(&sub, seq)?;
                let ids = tokenize(&encode_labeled(&sub, &ordering)?, model.vocab())?;
                if !cache.contains_key(&ids) {
                    let rep = representation(model, &ids, target)?;
                    cache.insert(ids.clone(), rep);
                }
                reps.push(ids);
            }
            for (i, a) in reps.iter().enumerate() {
                for b in &reps[i + 1..] {
                    let d: f64 = cache[a].iter().zip(&cache[b]).map(|(x, y)| (x - y) * (x - y)).sum();
                    gap = gap.max(d);
                }
            }
        }
    }
    Ok(gap)
}

fn representation(model: &RecurrentModel, ids: &[usize], target: OlrTarget) -> Result<Vec<f64>, ModelError> {
    let trace = model.forward(ids)?;
    Ok(match target {
        OlrTarget::RegressionOutput => vec![trace.final_output()],
        OlrTarget::Logits => trace.final_logits().to_vec(),
        OlrTarget::Hidden => trace.final_hidden().to_vec(),
    })
}
