//! Undirected simple graphs with optional node and edge labels.
//!
//! Nodes are dense indices `0..node_count`. Edges are stored canonically as
//! `(small, large)` pairs and every edge list this module hands out is sorted.

mod cuts;
mod format;
mod generate;

use std::collections::{BTreeMap, VecDeque};

pub use cuts::{ConnectivityClass, CutResult};
pub use format::{format_graph_line, parse_graph_file, parse_graph_line, write_graph_file, GraphRecord};
pub use generate::{random_connected_graph, random_connected_graph_with, random_tree, random_tree_with};

/// An undirected edge with `0 <= .0 < .1`.
pub type Edge = (usize, usize);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph needs at least {needed} nodes, has {actual}")]
    TooSmall { needed: usize, actual: usize },
    #[error("node {node} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("label count {labels} does not match node count {node_count}")]
    LabelCount { labels: usize, node_count: usize },
    #[error("cannot add {requested} extra edges; at most {available} non-tree edges exist")]
    InfeasibleExtraEdges { requested: usize, available: usize },
    #[error("max cut size must be 1 or 2, got {0}")]
    BadCutSize(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    node_labels: Option<Vec<String>>,
    edge_labels: BTreeMap<Edge, String>,
}

/// Puts an edge into canonical `(min, max)` form.
pub fn canonical_edge(a: usize, b: usize) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Graph {
    /// Graph with `node_count` isolated nodes.
    pub fn empty(node_count: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); node_count],
            node_labels: None,
            edge_labels: BTreeMap::new(),
        }
    }

    /// Builds a graph from an edge list, rejecting self-loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges(node_count: usize, edges: &[Edge]) -> Result<Self, GraphError> {
        let mut adjacency = vec![Vec::new(); node_count];
        for &(a, b) in edges {
            for node in [a, b] {
                if node >= node_count {
                    return Err(GraphError::NodeOutOfRange { node, node_count });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for (node, neighbors) in adjacency.iter_mut().enumerate() {
            neighbors.sort_unstable();
            if let Some(w) = neighbors.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = canonical_edge(node, w[0]);
                return Err(GraphError::DuplicateEdge(a, b));
            }
        }
        Ok(Graph {
            adjacency,
            node_labels: None,
            edge_labels: BTreeMap::new(),
        })
    }

    pub fn with_node_labels<S: Into<String>>(
        mut self,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self, GraphError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.node_count() {
            return Err(GraphError::LabelCount {
                labels: labels.len(),
                node_count: self.node_count(),
            });
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    pub fn set_edge_label(&mut self, a: usize, b: usize, label: impl Into<String>) -> bool {
        if !self.has_edge(a, b) {
            return false;
        }
        self.edge_labels.insert(canonical_edge(a, b), label.into());
        true
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbors of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.node_count() && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// All edges in canonical sorted order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (a, neighbors) in self.adjacency.iter().enumerate() {
            out.extend(neighbors.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        out
    }

    pub fn node_labels(&self) -> Option<&[String]> {
        self.node_labels.as_deref()
    }

    pub fn node_label(&self, node: usize) -> Option<&str> {
        self.node_labels.as_ref().map(|l| l[node].as_str())
    }

    pub fn edge_label(&self, a: usize, b: usize) -> Option<&str> {
        self.edge_labels.get(&canonical_edge(a, b)).map(String::as_str)
    }

    pub fn check_node(&self, node: usize) -> Result<(), GraphError> {
        if node < self.node_count() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange {
                node,
                node_count: self.node_count(),
            })
        }
    }

    /// Vertex-induced subgraph on `nodes`, relabeled densely in the order
    /// given. Returns the subgraph and the map from new index to old index.
    /// Labels are carried over.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> (Graph, Vec<usize>) {
        let mut new_index = vec![usize::MAX; self.node_count()];
        for (i, &v) in nodes.iter().enumerate() {
            new_index[v] = i;
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut edge_labels = BTreeMap::new();
        for (i, &v) in nodes.iter().enumerate() {
            for &w in &self.adjacency[v] {
                let j = new_index[w];
                if j != usize::MAX {
                    adjacency[i].push(j);
                    if i < j {
                        if let Some(label) = self.edge_labels.get(&canonical_edge(v, w)) {
                            edge_labels.insert((i, j), label.clone());
                        }
                    }
                }
            }
            adjacency[i].sort_unstable();
        }
        let node_labels = self
            .node_labels
            .as_ref()
            .map(|labels| nodes.iter().map(|&v| labels[v].clone()).collect());
        (
            Graph {
                adjacency,
                node_labels,
                edge_labels,
            },
            nodes.to_vec(),
        )
    }

    /// Copy of the graph with the listed edges removed. Unknown edges are ignored.
    pub fn without_edges(&self, removed: &[Edge]) -> Graph {
        let mut g = self.clone();
        for &(a, b) in removed {
            g.adjacency[a].retain(|&x| x != b);
            g.adjacency[b].retain(|&x| x != a);
            g.edge_labels.remove(&canonical_edge(a, b));
        }
        g
    }

    /// Connected components, each sorted, listed by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// True iff every node is reachable from node 0. The empty graph is connected.
    pub fn is_connected(&self) -> bool {
        self.node_count() == 0 || self.components().len() == 1
    }

    pub fn require_connected(&self) -> Result<(), GraphError> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(GraphError::Disconnected)
        }
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.edge_count() + 1 == self.node_count().max(1)
    }

    /// True for a connected graph in which every node has degree 2.
    pub fn is_cycle(&self) -> bool {
        self.node_count() >= 3
            && self.adjacency.iter().all(|n| n.len() == 2)
            && self.is_connected()
    }

    /// BFS distances from `source`; `usize::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Sum of shortest-path lengths over unordered node pairs.
    pub fn wiener_index(&self) -> Result<u64, GraphError> {
        self.require_connected()?;
        let mut total = 0u64;
        for source in 0..self.node_count() {
            let dist = self.bfs_distances(source);
            total += dist[source + 1..].iter().map(|&d| d as u64).sum::<u64>();
        }
        Ok(total)
    }

    /// Checks the field invariants: symmetric sorted adjacency, no self-loops,
    /// no parallel edges, labels sized to the node set.
    pub fn check_invariants(&self) -> bool {
        let n = self.node_count();
        let adjacency_ok = self.adjacency.iter().enumerate().all(|(v, neighbors)| {
            neighbors.windows(2).all(|w| w[0] < w[1])
                && neighbors
                    .iter()
                    .all(|&w| w < n && w != v && self.adjacency[w].binary_search(&v).is_ok())
        });
        let labels_ok = self.node_labels.as_ref().is_none_or(|l| l.len() == n);
        let edge_labels_ok = self.edge_labels.keys().all(|&(a, b)| a < b && self.has_edge(a, b));
        adjacency_ok && labels_ok && edge_labels_ok
    }
}
