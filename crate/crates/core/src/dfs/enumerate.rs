//! Exhaustive enumeration of DFS orderings. Exponential; only meant as a test
//! oracle on small graphs, so every entry point takes an explicit node bound.

use std::collections::BTreeSet;

use super::{replay, OrderError};
use crate::graph::Graph;

pub const DEFAULT_ORACLE_MAX_NODES: usize = 8;

fn check_bound(g: &Graph, bound: usize) -> Result<(), OrderError> {
    if g.node_count() > bound {
        return Err(OrderError::OracleBound {
            nodes: g.node_count(),
            bound,
        });
    }
    g.require_connected()?;
    Ok(())
}

/// Calls `on_prefix` on every DFS prefix (every root, every child choice).
/// Returning `false` from the callback prunes everything below that prefix.
fn walk_prefixes(g: &Graph, mut on_prefix: impl FnMut(&[usize]) -> bool) {
    let n = g.node_count();
    let mut visited = vec![false; n];
    let mut seq = Vec::with_capacity(n);
    for root in 0..n {
        visited[root] = true;
        seq.push(root);
        let mut stack = vec![root];
        descend(g, &mut visited, &mut stack, &mut seq, &mut on_prefix);
        seq.pop();
        visited[root] = false;
    }
}

fn descend(
    g: &Graph,
    visited: &mut [bool],
    stack: &mut Vec<usize>,
    seq: &mut Vec<usize>,
    on_prefix: &mut impl FnMut(&[usize]) -> bool,
) {
    if !on_prefix(seq) {
        return;
    }
    let mut popped = Vec::new();
    while let Some(&top) = stack.last() {
        if g.neighbors(top).iter().any(|&w| !visited[w]) {
            break;
        }
        popped.push(stack.pop().expect("non-empty"));
    }
    if let Some(&top) = stack.last() {
        let choices: Vec<usize> = g.neighbors(top).iter().copied().filter(|&w| !visited[w]).collect();
        for w in choices {
            visited[w] = true;
            seq.push(w);
            stack.push(w);
            descend(g, visited, stack, seq, on_prefix);
            stack.pop();
            seq.pop();
            visited[w] = false;
        }
    }
    stack.extend(popped.into_iter().rev());
}

/// Every valid ordering of `g`, i.e. the full set S(G).
pub fn enumerate_orderings(g: &Graph, bound: usize) -> Result<BTreeSet<Vec<usize>>, OrderError> {
    check_bound(g, bound)?;
    let n = g.node_count();
    let mut out = BTreeSet::new();
    walk_prefixes(g, |seq| {
        if seq.len() == n {
            out.insert(seq.to_vec());
        }
        true
    });
    Ok(out)
}

/// The valid orderings of `g` whose last node is `end`.
pub fn enumerate_orderings_ending_at(
    g: &Graph,
    end: usize,
    bound: usize,
) -> Result<BTreeSet<Vec<usize>>, OrderError> {
    g.check_node(end)?;
    let mut all = enumerate_orderings(g, bound)?;
    all.retain(|s| s.last() == Some(&end));
    Ok(all)
}

/// Sorted node sets of all DFS-induced subgraphs (vertex-induced reading):
/// the node sets of every prefix of every valid ordering.
pub fn dfs_induced_node_sets(g: &Graph, bound: usize) -> Result<BTreeSet<Vec<usize>>, OrderError> {
    check_bound(g, bound)?;
    let mut out = BTreeSet::new();
    walk_prefixes(g, |seq| {
        let mut set = seq.to_vec();
        set.sort_unstable();
        out.insert(set);
        true
    });
    Ok(out)
}

/// True iff some prefix of some valid ordering of `g` covers exactly `nodes`
/// and is itself a valid ordering of the vertex-induced subgraph on `nodes`.
pub fn is_dfs_induced(g: &Graph, nodes: &[usize], bound: usize) -> Result<bool, OrderError> {
    check_bound(g, bound)?;
    for &v in nodes {
        g.check_node(v)?;
    }
    let mut target = nodes.to_vec();
    target.sort_unstable();
    target.dedup();
    if target.is_empty() {
        return Ok(false);
    }
    let (sub, map) = g.induced_subgraph(&target);
    let mut to_sub = vec![usize::MAX; g.node_count()];
    for (i, &v) in map.iter().enumerate() {
        to_sub[v] = i;
    }
    let k = target.len();
    let mut found = false;
    walk_prefixes(g, |seq| {
        if found || target.binary_search(seq.last().expect("non-empty")).is_err() {
            return false;
        }
        if seq.len() < k {
            return true;
        }
        let local: Vec<usize> = seq.iter().map(|&v| to_sub[v]).collect();
        found = replay(&sub, &local).is_some();
        false
    });
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfs::is_valid_ordering;
    use crate::graph::random_connected_graph;
    use crate::graph::tests::{cycle, path, star};

    /// Independent oracle: filter all permutations through the validity checker.
    fn permutation_filter(g: &Graph) -> BTreeSet<Vec<usize>> {
        fn permute(rest: &mut Vec<usize>, cur: &mut Vec<usize>, g: &Graph, out: &mut BTreeSet<Vec<usize>>) {
            if rest.is_empty() {
                if is_valid_ordering(g, cur) {
                    out.insert(cur.clone());
                }
                return;
            }
            for i in 0..rest.len() {
                let v = rest.remove(i);
                cur.push(v);
                permute(rest, cur, g, out);
                cur.pop();
                rest.insert(i, v);
            }
        }
        let mut out = BTreeSet::new();
        permute(&mut (0..g.node_count()).collect(), &mut Vec::new(), g, &mut out);
        out
    }

    #[test]
    fn small_examples() {
        assert_eq!(enumerate_orderings(&cycle(3), 8).unwrap().len(), 6);
        let p3: BTreeSet<Vec<usize>> = [vec![0, 1, 2], vec![2, 1, 0], vec![1, 0, 2], vec![1, 2, 0]]
            .into_iter()
            .collect();
        assert_eq!(enumerate_orderings(&path(3), 8).unwrap(), p3);
        assert_eq!(
            enumerate_orderings(&Graph::empty(1), 8).unwrap(),
            [vec![0]].into_iter().collect()
        );
        assert_eq!(
            enumerate_orderings(&path(9), 8),
            Err(OrderError::OracleBound { nodes: 9, bound: 8 })
        );
    }

    #[test]
    fn ending_at_examples() {
        let ends2: BTreeSet<Vec<usize>> = [vec![0, 1, 2], vec![1, 0, 2]].into_iter().collect();
        assert_eq!(enumerate_orderings_ending_at(&path(3), 2, 8).unwrap(), ends2);
        assert!(enumerate_orderings_ending_at(&path(3), 1, 8).unwrap().is_empty());
        let tri = enumerate_orderings_ending_at(&cycle(3), 2, 8).unwrap();
        assert_eq!(tri.len(), 2);
        assert!(tri.iter().all(|s| s[2] == 2));
    }

    #[test]
    fn path_ordering_count_is_twice_edges() {
        for n in 2..=8 {
            let all = enumerate_orderings(&path(n), 8).unwrap();
            assert_eq!(all.len(), 2 * (n - 1));
            assert_eq!(all, permutation_filter(&path(n)));
        }
    }

    #[test]
    fn enumeration_matches_permutation_filter() {
        for seed in 0..60u64 {
            let n = 1 + (seed % 7) as usize;
            let extra = ((seed / 7) % 4) as usize;
            let g = random_connected_graph(n, extra.min(n * (n - 1) / 2 - (n - 1)), seed).unwrap();
            assert_eq!(enumerate_orderings(&g, 8).unwrap(), permutation_filter(&g), "seed {seed}");
        }
    }

    #[test]
    fn dfs_induced_examples() {
        let g = star(3);
        assert!(is_dfs_induced(&g, &[0, 1, 2, 3], 8).unwrap());
        for v in 0..4 {
            assert!(is_dfs_induced(&g, &[v], 8).unwrap());
        }
        // two leaves of a star never form a DFS prefix
        assert!(!is_dfs_induced(&g, &[1, 2], 8).unwrap());
        assert!(is_dfs_induced(&g, &[1, 0, 2], 8).unwrap());
        let sets = dfs_induced_node_sets(&g, 8).unwrap();
        assert!(sets.contains(&vec![0, 2]));
        assert!(!sets.contains(&vec![1, 2]));
    }
}
