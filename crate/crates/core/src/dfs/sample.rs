use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{OrderError, Ordering};
use crate::graph::Graph;

/// Stochastic DFS: uniform root when `root` is `None`, then a uniform choice
/// among the top's unvisited neighbors at every step.
pub fn sample_ordering(g: &Graph, root: Option<usize>, seed: u64) -> Result<Ordering, OrderError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_ordering_with(g, root, &mut rng)
}

pub fn sample_ordering_with<R: Rng + ?Sized>(
    g: &Graph,
    root: Option<usize>,
    rng: &mut R,
) -> Result<Ordering, OrderError> {
    g.require_connected()?;
    let n = g.node_count();
    if n == 0 {
        return Ordering::from_parts(Vec::new(), Vec::new());
    }
    let root = match root {
        Some(r) if r >= n => return Err(OrderError::RootOutOfRange { root: r, node_count: n }),
        Some(r) => r,
        None => rng.gen_range(0..n),
    };
    Ok(random_dfs(g, root, None, rng))
}

/// Random DFS from `root`. When `avoid` is set, that node is only entered if it
/// is the top's sole unvisited neighbor; the run is still a valid DFS, just
/// biased toward visiting `avoid` late.
pub(crate) fn random_dfs<R: Rng + ?Sized>(
    g: &Graph,
    root: usize,
    avoid: Option<usize>,
    rng: &mut R,
) -> Ordering {
    let n = g.node_count();
    let mut visited = vec![false; n];
    let mut visit = Vec::with_capacity(n);
    let mut parent = Vec::with_capacity(n);
    let mut stack = vec![root];
    visited[root] = true;
    visit.push(root);
    parent.push(None);
    let mut candidates = Vec::new();
    while let Some(&top) = stack.last() {
        candidates.clear();
        candidates.extend(g.neighbors(top).iter().copied().filter(|&w| !visited[w]));
        if candidates.is_empty() {
            stack.pop();
            continue;
        }
        if let Some(a) = avoid {
            if candidates.len() > 1 {
                candidates.retain(|&w| w != a);
            }
        }
        let &next = candidates.choose(rng).expect("non-empty");
        visited[next] = true;
        visit.push(next);
        parent.push(Some(top));
        stack.push(next);
    }
    Ordering { visit, parent }
}

/// True if some DFS run from `root` faces a choice between two or more
/// unvisited neighbors. Runs until the first such choice appears; until then
/// every run is the same run, so one pass decides it.
pub(crate) fn has_branching(g: &Graph, root: usize) -> bool {
    let n = g.node_count();
    let mut visited = vec![false; n];
    let mut stack = vec![root];
    visited[root] = true;
    while let Some(&top) = stack.last() {
        let mut unvisited = g.neighbors(top).iter().filter(|&&w| !visited[w]);
        match (unvisited.next(), unvisited.next()) {
            (Some(_), Some(_)) => return true,
            (Some(&w), None) => {
                visited[w] = true;
                stack.push(w);
            }
            _ => {
                stack.pop();
            }
        }
    }
    false
}

/// A DFS-induced subgraph together with the truncated ordering that induced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfsSubgraphSample {
    /// Vertex-induced subgraph on the first `k` visited nodes, relabeled densely
    /// in visit order.
    pub subgraph: Graph,
    /// `node_map[i]` is the original index of subgraph node `i`.
    pub node_map: Vec<usize>,
    /// The truncated ordering in subgraph indices (always `0, 1, .., k-1`).
    pub ordering: Ordering,
}

/// Samples a full ordering, cuts it at a uniform `k` in `1..=n` and returns
/// the induced subgraph on the visited prefix.
pub fn sample_dfs_induced_subgraph(g: &Graph, seed: u64) -> Result<DfsSubgraphSample, OrderError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_dfs_induced_subgraph_with(g, &mut rng)
}

pub fn sample_dfs_induced_subgraph_with<R: Rng + ?Sized>(
    g: &Graph,
    rng: &mut R,
) -> Result<DfsSubgraphSample, OrderError> {
    let full = sample_ordering_with(g, None, rng)?;
    let k = rng.gen_range(1..=full.len().max(1));
    Ok(truncate_to_subgraph(g, &full, k))
}

pub(crate) fn truncate_to_subgraph(g: &Graph, full: &Ordering, k: usize) -> DfsSubgraphSample {
    let prefix = full.prefix(k);
    let (subgraph, node_map) = g.induced_subgraph(prefix.visit());
    let mut to_sub = vec![usize::MAX; g.node_count()];
    for (i, &v) in node_map.iter().enumerate() {
        to_sub[v] = i;
    }
    DfsSubgraphSample {
        subgraph,
        node_map,
        ordering: prefix.map_nodes(&to_sub),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfs::is_valid_ordering;
    use crate::graph::random_connected_graph;
    use crate::graph::tests::{path, star};
    use std::collections::BTreeSet;

    #[test]
    fn forced_single_edge() {
        let g = path(2);
        assert_eq!(sample_ordering(&g, Some(0), 5).unwrap().visit(), &[0, 1]);
        assert_eq!(
            sample_ordering(&g, Some(2), 5),
            Err(OrderError::RootOutOfRange { root: 2, node_count: 2 })
        );
    }

    #[test]
    fn both_runs_from_path_middle_are_reachable() {
        let g = path(3);
        let seen: BTreeSet<Vec<usize>> = (0..64)
            .map(|s| sample_ordering(&g, Some(1), s).unwrap().visit().to_vec())
            .collect();
        let expected: BTreeSet<Vec<usize>> = [vec![1, 0, 2], vec![1, 2, 0]].into_iter().collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn samples_are_valid_and_deterministic() {
        for seed in 0..200u64 {
            let n = 1 + (seed % 12) as usize;
            let extra = (seed as usize / 12) % 4;
            let extra = extra.min(n * (n - 1) / 2 - (n - 1));
            let g = random_connected_graph(n, extra, seed).unwrap();
            let o = sample_ordering(&g, None, seed).unwrap();
            assert!(is_valid_ordering(&g, o.visit()));
            assert_eq!(Ordering::from_sequence(&g, o.visit()).unwrap(), o);
            assert_eq!(sample_ordering(&g, None, seed).unwrap(), o);
        }
    }

    #[test]
    fn branching_detection() {
        assert!(!has_branching(&path(4), 0));
        assert!(has_branching(&path(4), 1));
        assert!(has_branching(&star(2), 0));
        assert!(!has_branching(&star(2), 1));
    }

    #[test]
    fn subgraph_samples_cover_extremes_and_are_valid() {
        let g = star(4);
        let full = sample_ordering(&g, Some(0), 1).unwrap();
        let whole = truncate_to_subgraph(&g, &full, 5);
        assert_eq!(whole.subgraph.edge_count(), 4);
        assert_eq!(whole.ordering.visit(), &[0, 1, 2, 3, 4]);
        let single = truncate_to_subgraph(&g, &full, 1);
        assert_eq!(single.subgraph.node_count(), 1);

        for seed in 0..500u64 {
            let n = 1 + (seed % 10) as usize;
            let extra = ((seed / 10) % 3) as usize;
            let extra = extra.min(n * (n - 1) / 2 - (n - 1));
            let g = random_connected_graph(n, extra, seed).unwrap();
            let s = sample_dfs_induced_subgraph(&g, seed).unwrap();
            assert!(is_valid_ordering(&s.subgraph, s.ordering.visit()), "seed {seed}");
        }
    }
}
