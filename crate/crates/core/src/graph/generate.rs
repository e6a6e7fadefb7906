use std::collections::BinaryHeap;
use std::cmp::Reverse;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, Graph, GraphError};

/// Uniformly random labeled tree on `n` nodes, decoded from a random Prüfer code.
pub fn random_tree(n: usize, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tree_with(n, &mut rng)
}

pub fn random_tree_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::TooSmall { needed: 1, actual: 0 });
    }
    if n <= 2 {
        let edges: Vec<Edge> = (1..n).map(|i| (0, i)).collect();
        return Graph::from_edges(n, &edges);
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    Graph::from_edges(n, &prufer_decode(n, &code))
}

fn prufer_decode(n: usize, code: &[usize]) -> Vec<Edge> {
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in code {
        let Reverse(leaf) = leaves.pop().expect("a Prüfer code always leaves a leaf");
        edges.push(super::canonical_edge(leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.push(Reverse(c));
        }
    }
    let Reverse(a) = leaves.pop().expect("two leaves remain");
    let Reverse(b) = leaves.pop().expect("two leaves remain");
    edges.push(super::canonical_edge(a, b));
    edges
}

/// Random tree plus `extra_edges` distinct non-tree edges chosen uniformly.
pub fn random_connected_graph(n: usize, extra_edges: usize, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_connected_graph_with(n, extra_edges, &mut rng)
}

pub fn random_connected_graph_with<R: Rng + ?Sized>(
    n: usize,
    extra_edges: usize,
    rng: &mut R,
) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::TooSmall { needed: 1, actual: 0 });
    }
    let available = n * (n - 1) / 2 - (n - 1);
    if extra_edges > available {
        return Err(GraphError::InfeasibleExtraEdges {
            requested: extra_edges,
            available,
        });
    }
    let tree = random_tree_with(n, rng)?;
    if extra_edges == 0 {
        return Ok(tree);
    }
    let mut candidates = Vec::with_capacity(available);
    for a in 0..n {
        for b in a + 1..n {
            if !tree.has_edge(a, b) {
                candidates.push((a, b));
            }
        }
    }
    let mut picked: Vec<usize> = index::sample(rng, candidates.len(), extra_edges).into_vec();
    picked.sort_unstable();
    let mut edges = tree.edges();
    edges.extend(picked.into_iter().map(|i| candidates[i]));
    Graph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn small_trees() {
        assert_eq!(random_tree(0, 1), Err(GraphError::TooSmall { needed: 1, actual: 0 }));
        let one = random_tree(1, 3).unwrap();
        assert_eq!((one.node_count(), one.edge_count()), (1, 0));
        assert_eq!(random_tree(2, 3).unwrap().edges(), vec![(0, 1)]);
        assert_eq!(random_tree(10, 42).unwrap(), random_tree(10, 42).unwrap());
    }

    #[test]
    fn generated_graphs_satisfy_invariants() {
        for seed in 0..200 {
            let n = 1 + (seed % 12) as usize;
            let t = random_tree(n, seed).unwrap();
            assert!(t.is_tree() && t.check_invariants());
            let extra = (seed as usize) % (n * (n - 1) / 2 - (n - 1) + 1);
            let g = random_connected_graph(n, extra, seed).unwrap();
            assert!(g.is_connected() && g.check_invariants());
            assert_eq!(g.edge_count(), n - 1 + extra);
        }
    }

    #[test]
    fn connected_graph_examples() {
        let tri = random_connected_graph(3, 1, 9).unwrap();
        assert_eq!(tri.edges(), vec![(0, 1), (0, 2), (1, 2)]);
        let t = random_connected_graph(5, 0, 9).unwrap();
        assert_eq!(t.find_bridges().unwrap().len(), 4);
        let g = random_connected_graph(8, 3, 9).unwrap();
        assert_eq!(g.edge_count(), 10);
        assert!(g.is_connected());
        assert!(matches!(
            random_connected_graph(4, 4, 0),
            Err(GraphError::InfeasibleExtraEdges { requested: 4, available: 3 })
        ));
    }

    #[test]
    fn trees_on_four_nodes_are_roughly_uniform() {
        // 4^2 = 16 labeled trees; each should show up near 1/16 of the time.
        let mut counts: HashMap<Vec<Edge>, usize> = HashMap::new();
        let draws = 16_000;
        for seed in 0..draws {
            *counts.entry(random_tree(4, seed).unwrap().edges()).or_default() += 1;
        }
        assert_eq!(counts.len(), 16);
        for (tree, count) in counts {
            assert!((800..1200).contains(&count), "{tree:?} drawn {count} times");
        }
    }
}
