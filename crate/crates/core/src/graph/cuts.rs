use super::{canonical_edge, Edge, Graph, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectivityClass {
    /// Has at least one bridge.
    OneEdgeConnected,
    /// No bridge, but some pair of edges disconnects the graph.
    TwoEdgeConnected,
    /// Survives removal of any two edges.
    Higher,
}

/// A minimal edge cut and the two connected sides it leaves behind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutResult {
    /// One or two canonical edges, sorted.
    pub crossing_edges: Vec<Edge>,
    /// Side holding the smaller endpoint of the first crossing edge (sorted).
    pub side_a: Vec<usize>,
    /// The remaining nodes (sorted).
    pub side_b: Vec<usize>,
}

impl CutResult {
    /// Builds the cut by removing `crossing` and reading off the components.
    /// Returns `None` unless exactly two components remain.
    pub fn from_crossing(g: &Graph, mut crossing: Vec<Edge>) -> Option<CutResult> {
        crossing.sort_unstable();
        let comps = g.without_edges(&crossing).components();
        if comps.len() != 2 {
            return None;
        }
        let anchor = crossing[0].0;
        let (a, b) = if comps[0].binary_search(&anchor).is_ok() {
            (comps[0].clone(), comps[1].clone())
        } else {
            (comps[1].clone(), comps[0].clone())
        };
        Some(CutResult {
            crossing_edges: crossing,
            side_a: a,
            side_b: b,
        })
    }

    pub fn side_of(&self, node: usize) -> Option<bool> {
        if self.side_a.binary_search(&node).is_ok() {
            Some(true)
        } else if self.side_b.binary_search(&node).is_ok() {
            Some(false)
        } else {
            None
        }
    }
}

impl Graph {
    /// Bridges in canonical sorted order, found with one low-link DFS pass.
    pub fn find_bridges(&self) -> Result<Vec<Edge>, GraphError> {
        self.require_connected()?;
        let n = self.node_count();
        let mut bridges = Vec::new();
        if n == 0 {
            return Ok(bridges);
        }
        const UNSEEN: usize = usize::MAX;
        let mut order = vec![UNSEEN; n];
        let mut low = vec![0usize; n];
        let mut clock = 0;
        // (node, parent, next neighbor position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(0, UNSEEN, 0)];
        order[0] = clock;
        low[0] = clock;
        clock += 1;
        while let Some(&(v, parent, pos)) = stack.last() {
            if let Some(&w) = self.adjacency[v].get(pos) {
                if let Some(top) = stack.last_mut() {
                    top.2 += 1;
                }
                if w == parent {
                    continue;
                }
                if order[w] == UNSEEN {
                    order[w] = clock;
                    low[w] = clock;
                    clock += 1;
                    stack.push((w, v, 0));
                } else {
                    low[v] = low[v].min(order[w]);
                }
            } else {
                stack.pop();
                if parent != UNSEEN {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > order[parent] {
                        bridges.push(canonical_edge(parent, v));
                    }
                }
            }
        }
        bridges.sort_unstable();
        Ok(bridges)
    }

    pub fn edge_connectivity_class(&self) -> Result<ConnectivityClass, GraphError> {
        if self.node_count() < 2 {
            return Err(GraphError::TooSmall {
                needed: 2,
                actual: self.node_count(),
            });
        }
        if !self.find_bridges()?.is_empty() {
            return Ok(ConnectivityClass::OneEdgeConnected);
        }
        if self.disconnecting_pairs().next().is_some() {
            Ok(ConnectivityClass::TwoEdgeConnected)
        } else {
            Ok(ConnectivityClass::Higher)
        }
    }

    /// All cuts of the minimum size, provided that size is at most `max_size`.
    /// Size-2 cuts are found by trying every edge pair.
    pub fn enumerate_min_cuts(&self, max_size: usize) -> Result<Vec<CutResult>, GraphError> {
        if !(1..=2).contains(&max_size) {
            return Err(GraphError::BadCutSize(max_size));
        }
        let bridges = self.find_bridges()?;
        if !bridges.is_empty() {
            return Ok(bridges
                .into_iter()
                .filter_map(|e| CutResult::from_crossing(self, vec![e]))
                .collect());
        }
        if max_size < 2 || self.node_count() < 2 {
            return Ok(Vec::new());
        }
        Ok(self
            .disconnecting_pairs()
            .filter_map(|(e, f)| CutResult::from_crossing(self, vec![e, f]))
            .collect())
    }

    fn disconnecting_pairs(&self) -> impl Iterator<Item = (Edge, Edge)> + '_ {
        let edges = self.edges();
        let m = edges.len();
        (0..m)
            .flat_map(move |i| (i + 1..m).map(move |j| (i, j)))
            .map(move |(i, j)| (edges[i], edges[j]))
            .filter(move |&(e, f)| !self.without_edges(&[e, f]).is_connected())
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{complete, cycle, path};
    use super::*;
    use crate::graph::random_connected_graph;

    fn brute_force_bridges(g: &Graph) -> Vec<Edge> {
        g.edges()
            .into_iter()
            .filter(|&e| !g.without_edges(&[e]).is_connected())
            .collect()
    }

    #[test]
    fn bridge_examples() {
        assert_eq!(path(3).find_bridges().unwrap(), vec![(0, 1), (1, 2)]);
        assert!(cycle(3).find_bridges().unwrap().is_empty());
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (0, 3)]).unwrap();
        assert_eq!(g.find_bridges().unwrap(), brute_force_bridges(&g));
        assert_eq!(g.find_bridges().unwrap(), vec![(0, 3)]);
        assert_eq!(Graph::empty(2).find_bridges(), Err(GraphError::Disconnected));
    }

    #[test]
    fn bridges_match_brute_force_on_random_graphs() {
        for seed in 0..300u64 {
            let n = 2 + (seed % 9) as usize;
            let max_extra = n * (n - 1) / 2 - (n - 1);
            let extra = (seed as usize / 9) % (max_extra + 1).min(6);
            let g = random_connected_graph(n, extra, seed).unwrap();
            assert_eq!(g.find_bridges().unwrap(), brute_force_bridges(&g), "seed {seed}");
        }
    }

    #[test]
    fn class_examples() {
        assert_eq!(
            path(3).edge_connectivity_class(),
            Ok(ConnectivityClass::OneEdgeConnected)
        );
        assert_eq!(
            cycle(4).edge_connectivity_class(),
            Ok(ConnectivityClass::TwoEdgeConnected)
        );
        assert_eq!(complete(4).edge_connectivity_class(), Ok(ConnectivityClass::Higher));
        assert!(Graph::empty(1).edge_connectivity_class().is_err());
        assert_eq!(
            Graph::empty(3).edge_connectivity_class(),
            Err(GraphError::Disconnected)
        );
    }

    #[test]
    fn min_cut_examples() {
        let cuts = path(3).enumerate_min_cuts(2).unwrap();
        assert_eq!(
            cuts,
            vec![
                CutResult {
                    crossing_edges: vec![(0, 1)],
                    side_a: vec![0],
                    side_b: vec![1, 2]
                },
                CutResult {
                    crossing_edges: vec![(1, 2)],
                    side_a: vec![0, 1],
                    side_b: vec![2]
                },
            ]
        );
        assert!(cycle(4).enumerate_min_cuts(1).unwrap().is_empty());
        let cuts = cycle(4).enumerate_min_cuts(2).unwrap();
        assert!(cuts.contains(&CutResult {
            crossing_edges: vec![(0, 1), (2, 3)],
            side_a: vec![0, 3],
            side_b: vec![1, 2],
        }));
        // every pair of edges of a 4-cycle is a 2-cut
        assert_eq!(cuts.len(), 6);
        assert!(complete(4).enumerate_min_cuts(2).unwrap().is_empty());
        assert!(path(3).enumerate_min_cuts(3).is_err());
    }

    #[test]
    fn cut_sides_are_the_components_after_removal() {
        for seed in 0..200u64 {
            let n = 3 + (seed % 8) as usize;
            let g = random_connected_graph(n, (seed % 4) as usize, seed).unwrap();
            for cut in g.enumerate_min_cuts(2).unwrap() {
                let comps = g.without_edges(&cut.crossing_edges).components();
                assert_eq!(comps.len(), 2);
                assert!(comps.contains(&cut.side_a) && comps.contains(&cut.side_b));
                for &(a, b) in &cut.crossing_edges {
                    assert_ne!(cut.side_of(a), cut.side_of(b));
                }
            }
        }
    }
}
