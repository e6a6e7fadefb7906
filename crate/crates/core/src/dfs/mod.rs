//! Depth-first visit orders of connected graphs.
//!
//! An [`Ordering`] is a visit sequence that some DFS run can produce, together
//! with the DFS tree that run builds. Backtracking is forced: a node leaves the
//! stack only once all of its neighbors are visited. Under that rule the parent
//! of every visited node is determined by the sequence alone, so replaying a
//! sequence both validates it and recovers its tree.

mod enumerate;
mod invariance;
mod sample;
mod trajectories;

use crate::graph::{Edge, Graph, GraphError};

pub use enumerate::{
    dfs_induced_node_sets, enumerate_orderings, enumerate_orderings_ending_at, is_dfs_induced,
    DEFAULT_ORACLE_MAX_NODES,
};
pub use invariance::{structure_invariance_gap, InvarianceError};
pub use sample::{
    sample_dfs_induced_subgraph, sample_dfs_induced_subgraph_with, sample_ordering, sample_ordering_with,
    DfsSubgraphSample,
};
pub use trajectories::{
    common_end_pair_any, common_end_pair_bridge, common_end_pair_cycle,
    common_end_pair_two_connected, trajectory_set, GlueForm, TrajectoryOptions,
    DEFAULT_REJECTION_BUDGET,
};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OrderError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("root {root} out of range for graph with {node_count} nodes")]
    RootOutOfRange { root: usize, node_count: usize },
    #[error("oracle bound exceeded: graph has {nodes} nodes, bound is {bound}")]
    OracleBound { nodes: usize, bound: usize },
    #[error("sequence is not a valid DFS ordering of the graph")]
    InvalidOrdering,
    #[error("cut is not a single bridge with endpoint {0}")]
    NotABridge(usize),
    #[error("no branching on cut side")]
    NoBranching,
    #[error("degenerate suffix side")]
    DegenerateSuffix,
    #[error("cycle special case")]
    CycleSpecialCase,
    #[error("graph is not 2-edge-connected")]
    NotTwoEdgeConnected,
    #[error("no end-constrained traversal found (last cut tried: {cut:?})")]
    NoEndConstrainedTraversal { cut: Vec<Edge> },
    #[error("graph admits no heuristic pair")]
    NoHeuristicPair,
    #[error("trajectory pair must hold two distinct orderings with a common last node")]
    BadPair,
}

/// A DFS visit sequence and the parent of each visited node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ordering {
    visit: Vec<usize>,
    /// `parent[i]` is the DFS parent of `visit[i]`; `None` only for the root.
    parent: Vec<Option<usize>>,
}

impl Ordering {
    /// Replays `seq` on `g` and keeps it if it is a valid ordering of the whole graph.
    pub fn from_sequence(g: &Graph, seq: &[usize]) -> Result<Ordering, OrderError> {
        match replay(g, seq) {
            Some(parent) if seq.len() == g.node_count() => Ok(Ordering {
                visit: seq.to_vec(),
                parent,
            }),
            _ => Err(OrderError::InvalidOrdering),
        }
    }

    /// Builds an ordering from explicit parents without consulting a graph.
    /// Checks only that the root comes first and every parent precedes its child.
    pub fn from_parts(visit: Vec<usize>, parent: Vec<Option<usize>>) -> Result<Ordering, OrderError> {
        if visit.len() != parent.len() {
            return Err(OrderError::InvalidOrdering);
        }
        let mut seen = std::collections::HashSet::with_capacity(visit.len());
        for (i, (&v, &p)) in visit.iter().zip(&parent).enumerate() {
            let ok = match p {
                None => i == 0,
                Some(p) => i > 0 && seen.contains(&p),
            };
            if !ok || !seen.insert(v) {
                return Err(OrderError::InvalidOrdering);
            }
        }
        Ok(Ordering { visit, parent })
    }

    pub fn visit(&self) -> &[usize] {
        &self.visit
    }

    /// Parents aligned with [`Ordering::visit`].
    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn len(&self) -> usize {
        self.visit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visit.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        self.visit.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.visit.last().copied()
    }

    pub fn parent_of(&self, node: usize) -> Option<usize> {
        self.visit
            .iter()
            .position(|&v| v == node)
            .and_then(|i| self.parent[i])
    }

    /// DFS tree edges in canonical sorted order.
    pub fn tree_edges(&self) -> Vec<Edge> {
        let mut edges: Vec<Edge> = self
            .visit
            .iter()
            .zip(&self.parent)
            .filter_map(|(&v, p)| p.map(|p| crate::graph::canonical_edge(p, v)))
            .collect();
        edges.sort_unstable();
        edges
    }

    /// First `k` visited nodes with their parents.
    pub fn prefix(&self, k: usize) -> Ordering {
        Ordering {
            visit: self.visit[..k].to_vec(),
            parent: self.parent[..k].to_vec(),
        }
    }

    /// Renames every node through `map` (new name = `map[old]`).
    pub fn map_nodes(&self, map: &[usize]) -> Ordering {
        Ordering {
            visit: self.visit.iter().map(|&v| map[v]).collect(),
            parent: self.parent.iter().map(|p| p.map(|p| map[p])).collect(),
        }
    }
}

/// Two distinct valid orderings of one graph that end at the same node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryPair {
    first: Ordering,
    second: Ordering,
    common_end: usize,
}

impl TrajectoryPair {
    pub fn new(first: Ordering, second: Ordering) -> Result<TrajectoryPair, OrderError> {
        match (first.last(), second.last()) {
            (Some(a), Some(b)) if a == b && first.visit != second.visit => Ok(TrajectoryPair {
                first,
                second,
                common_end: a,
            }),
            _ => Err(OrderError::BadPair),
        }
    }

    pub fn first(&self) -> &Ordering {
        &self.first
    }

    pub fn second(&self) -> &Ordering {
        &self.second
    }

    pub fn common_end(&self) -> usize {
        self.common_end
    }
}

/// True iff `seq` is a permutation of `g`'s nodes that a DFS with forced
/// backtracking can visit in that order. Runs in amortized linear time.
pub fn is_valid_ordering(g: &Graph, seq: &[usize]) -> bool {
    seq.len() == g.node_count() && replay(g, seq).is_some()
}

/// Simulates DFS along `seq` and returns each element's parent, or `None` as
/// soon as the sequence leaves what a DFS could do. `seq` may be a prefix.
pub(crate) fn replay(g: &Graph, seq: &[usize]) -> Option<Vec<Option<usize>>> {
    let n = g.node_count();
    let mut visited = vec![false; n];
    // next adjacency position that might still be unvisited
    let mut scan = vec![0usize; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut parents = Vec::with_capacity(seq.len());
    for (i, &v) in seq.iter().enumerate() {
        if v >= n || visited[v] {
            return None;
        }
        if i == 0 {
            parents.push(None);
        } else {
            let top = loop {
                let &top = stack.last()?;
                let neighbors = g.neighbors(top);
                while scan[top] < neighbors.len() && visited[neighbors[scan[top]]] {
                    scan[top] += 1;
                }
                if scan[top] < neighbors.len() {
                    break top;
                }
                stack.pop();
            };
            if !g.has_edge(top, v) {
                return None;
            }
            parents.push(Some(top));
        }
        visited[v] = true;
        stack.push(v);
    }
    Some(parents)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graph::tests::path;

    /// Six-node example graph: A joined to B, C and D, and a triangle B, E, F.
    /// Nodes A..F are 0..5.
    pub fn six_node_example() -> Graph {
        Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (4, 5)])
            .unwrap()
            .with_node_labels(["A", "B", "C", "D", "E", "F"])
            .unwrap()
    }

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    const D: usize = 3;
    const E: usize = 4;
    const F: usize = 5;

    #[test]
    fn example_traversals_are_valid() {
        let g = six_node_example();
        assert!(is_valid_ordering(&g, &[A, B, E, F, C, D]));
        assert!(is_valid_ordering(&g, &[A, C, B, F, E, D]));
        // backtracking out of B before F is visited is not allowed
        assert!(!is_valid_ordering(&g, &[A, B, E, C, F, D]));
    }

    #[test]
    fn path_examples() {
        let g = path(3);
        assert!(!is_valid_ordering(&g, &[0, 2, 1]));
        assert!(is_valid_ordering(&g, &[1, 0, 2]));
        assert!(!is_valid_ordering(&g, &[0, 1]));
        assert!(!is_valid_ordering(&g, &[0, 1, 1]));
        assert!(!is_valid_ordering(&g, &[0, 1, 3]));
    }

    #[test]
    fn replay_recovers_parents() {
        let o = Ordering::from_sequence(&six_node_example(), &[A, B, E, F, C, D]).unwrap();
        assert_eq!(o.parents(), &[None, Some(A), Some(B), Some(E), Some(A), Some(A)]);
        assert_eq!(o.tree_edges(), vec![(0, 1), (0, 2), (0, 3), (1, 4), (4, 5)]);
        assert_eq!(o.parent_of(F), Some(E));
    }

    #[test]
    fn pair_invariants_enforced() {
        let g = six_node_example();
        let a = Ordering::from_sequence(&g, &[A, B, E, F, C, D]).unwrap();
        let b = Ordering::from_sequence(&g, &[A, C, B, F, E, D]).unwrap();
        let c = Ordering::from_sequence(&g, &[A, B, E, F, D, C]).unwrap();
        assert_eq!(TrajectoryPair::new(a.clone(), b).unwrap().common_end(), D);
        assert_eq!(TrajectoryPair::new(a.clone(), a.clone()), Err(OrderError::BadPair));
        assert_eq!(TrajectoryPair::new(a, c), Err(OrderError::BadPair));
    }

    #[test]
    fn from_parts_checks_parent_order() {
        assert!(Ordering::from_parts(vec![0, 1], vec![None, Some(0)]).is_ok());
        assert!(Ordering::from_parts(vec![0, 1], vec![None, Some(1)]).is_err());
        assert!(Ordering::from_parts(vec![0, 1], vec![None, None]).is_err());
    }

    #[test]
    fn validity_check_is_fast_on_long_paths() {
        let n = 10_000;
        let g = path(n);
        let seq: Vec<usize> = (0..n).collect();
        let start = std::time::Instant::now();
        assert!(is_valid_ordering(&g, &seq));
        let mut from_middle: Vec<usize> = (n / 2..n).collect();
        from_middle.extend((0..n / 2).rev());
        assert!(is_valid_ordering(&g, &from_middle));
        assert!(start.elapsed() < std::time::Duration::from_millis(200));
    }
}
