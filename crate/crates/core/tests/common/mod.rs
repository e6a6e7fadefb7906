//! Brute-force oracles shared by the integration tests. None of them calls the
//! library's own traversal, enumeration or distance code.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use orderless::graph::Graph;
use orderless::recurrent::{LossTerm, RecurrentModel};

/// Six-node example graph: A joined to B, C and D, and a triangle B, E, F.
/// Nodes A..F are 0..5.
pub fn six_node_example() -> Graph {
    Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (4, 5)])
        .unwrap()
        .with_node_labels(["A", "B", "C", "D", "E", "F"])
        .unwrap()
}

fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut adj = vec![vec![false; n]; n];
    for (a, b) in g.edges() {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    adj
}

/// Every complete run of a recursive DFS that may pick any unvisited neighbor
/// next, from any root.
pub fn brute_orderings(g: &Graph) -> BTreeSet<Vec<usize>> {
    fn explore(adj: &[Vec<bool>], stack: &mut Vec<usize>, seq: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        let n = adj.len();
        if seq.len() == n {
            out.insert(seq.clone());
            return;
        }
        // the deepest stack node with an unvisited neighbor moves next
        let mut depth = stack.len();
        while depth > 0 {
            let top = stack[depth - 1];
            if (0..n).any(|w| adj[top][w] && !seq.contains(&w)) {
                break;
            }
            depth -= 1;
        }
        if depth == 0 {
            return;
        }
        let top = stack[depth - 1];
        for w in 0..n {
            if adj[top][w] && !seq.contains(&w) {
                let mut next_stack = stack[..depth].to_vec();
                next_stack.push(w);
                seq.push(w);
                explore(adj, &mut next_stack, seq, out);
                seq.pop();
            }
        }
    }
    let adj = adjacency(g);
    let mut out = BTreeSet::new();
    for root in 0..g.node_count() {
        explore(&adj, &mut vec![root], &mut vec![root], &mut out);
    }
    out
}

pub fn brute_orderings_ending_at(g: &Graph, end: usize) -> BTreeSet<Vec<usize>> {
    brute_orderings(g).into_iter().filter(|s| s.last() == Some(&end)).collect()
}

/// Sorted node sets of all prefixes of all orderings.
pub fn brute_prefix_sets(g: &Graph) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    for seq in brute_orderings(g) {
        for k in 1..=seq.len() {
            let mut set = seq[..k].to_vec();
            set.sort_unstable();
            out.insert(set);
        }
    }
    out
}

/// Wiener index by Floyd-Warshall; `None` if `g` is disconnected.
pub fn floyd_warshall_wiener(g: &Graph) -> Option<u64> {
    let n = g.node_count();
    let inf = u64::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (a, b) in g.edges() {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let mut total = 0;
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j] >= inf {
                return None;
            }
            total += d[i][j];
        }
    }
    Some(total)
}

fn connected_on(adj: &[Vec<bool>], nodes: &[usize]) -> bool {
    let Some(&start) = nodes.first() else { return false };
    let mut seen = vec![start];
    let mut frontier = vec![start];
    while let Some(v) = frontier.pop() {
        for &w in nodes {
            if adj[v][w] && !seen.contains(&w) {
                seen.push(w);
                frontier.push(w);
            }
        }
    }
    seen.len() == nodes.len()
}

/// A connected graph with a connected vertex-induced subgraph that is not
/// the node set of any DFS prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub subset: Vec<usize>,
}

impl Witness {
    pub fn graph(&self) -> Graph {
        Graph::from_edges(self.node_count, &self.edges).unwrap()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# connected vertex-induced subgraph that no DFS prefix covers\n");
        out.push_str("reading vertex-induced\n");
        let _ = writeln!(out, "nodes {}", self.node_count);
        let edges: Vec<String> = self.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        let _ = writeln!(out, "edges {}", edges.join(" "));
        let subset: Vec<String> = self.subset.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "subset {}", subset.join(" "));
        out
    }

    pub fn parse(text: &str) -> Result<Witness, String> {
        let mut node_count = None;
        let mut edges = None;
        let mut subset = None;
        let mut reading = None;
        for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            let num = |s: &str| s.parse::<usize>().map_err(|_| format!("bad number `{s}`"));
            match key {
                "reading" => reading = Some(rest.to_string()),
                "nodes" => node_count = Some(num(rest)?),
                "edges" => {
                    edges = Some(
                        rest.split_whitespace()
                            .map(|e| {
                                let (a, b) = e.split_once('-').ok_or(format!("bad edge `{e}`"))?;
                                Ok((num(a)?, num(b)?))
                            })
                            .collect::<Result<Vec<_>, String>>()?,
                    )
                }
                "subset" => subset = Some(rest.split_whitespace().map(num).collect::<Result<Vec<_>, _>>()?),
                other => return Err(format!("unknown key `{other}`")),
            }
        }
        if reading.as_deref() != Some("vertex-induced") {
            return Err("only the vertex-induced reading is stored".into());
        }
        Ok(Witness {
            node_count: node_count.ok_or("missing nodes")?,
            edges: edges.ok_or("missing edges")?,
            subset: subset.ok_or("missing subset")?,
        })
    }
}

/// First witness in (node count, edge mask, subset mask) order with at most
/// `max_nodes` nodes.
pub fn search_witness(max_nodes: usize) -> Option<Witness> {
    for n in 1..=max_nodes {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        for mask in 0u64..(1 << pairs.len()) {
            let edges: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let g = Graph::from_edges(n, &edges).unwrap();
            let adj = adjacency(&g);
            let all: Vec<usize> = (0..n).collect();
            if !connected_on(&adj, &all) {
                continue;
            }
            let mut prefix_sets: Option<BTreeSet<Vec<usize>>> = None;
            for sub in 1u64..(1 << n) {
                let nodes: Vec<usize> = (0..n).filter(|&v| sub >> v & 1 == 1).collect();
                if !connected_on(&adj, &nodes) {
                    continue;
                }
                let sets = prefix_sets.get_or_insert_with(|| brute_prefix_sets(&g));
                if !sets.contains(&nodes) {
                    return Some(Witness {
                        node_count: n,
                        edges,
                        subset: nodes,
                    });
                }
            }
        }
    }
    None
}

pub fn is_connected_subset(g: &Graph, nodes: &[usize]) -> bool {
    connected_on(&adjacency(g), nodes)
}

/// Largest relative error between analytic gradients and the fourth-order
/// five-point central difference over every parameter. Relative errors use a
/// denominator of at least 1e-6.
pub fn max_fd_relative_error(model: &RecurrentModel, terms: &[(f64, LossTerm<'_>)], step: f64) -> f64 {
    let (_, grads) = model.backward(terms).unwrap();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for i in 0..model.param_count() {
        let base = probe.params()[i];
        let mut at = |offset: f64| {
            probe.params_mut()[i] = base + offset;
            probe.evaluate(terms).unwrap().total
        };
        let numeric = (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
        probe.params_mut()[i] = base;
        let analytic = grads.values()[i];
        let denom = analytic.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic - numeric).abs() / denom);
    }
    worst
}

/// Distinct elements of `items` among those marked valid.
pub fn distinct_valid<'a>(items: impl IntoIterator<Item = &'a Option<String>>) -> HashSet<&'a String> {
    items.into_iter().flatten().collect()
}
