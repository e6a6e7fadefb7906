//! Golden test for the smallest connected subgraph that is not DFS-induced.
//! Set `BLESS_FIXTURES=1` to rewrite the fixture from a fresh search.

mod common;

use common::{brute_prefix_sets, is_connected_subset, search_witness, Witness};
use orderless::dfs::{dfs_induced_node_sets, is_dfs_induced};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/not_dfs_induced.txt");

#[test]
fn search_reproduces_the_stored_witness() {
    let found = search_witness(6).expect("a witness exists at six nodes or fewer");
    if std::env::var_os("BLESS_FIXTURES").is_some() {
        std::fs::write(FIXTURE, found.to_text()).unwrap();
    }
    let stored = Witness::parse(&std::fs::read_to_string(FIXTURE).unwrap()).unwrap();
    assert_eq!(found, stored);
}

#[test]
fn stored_witness_replays() {
    let w = Witness::parse(&std::fs::read_to_string(FIXTURE).unwrap()).unwrap();
    let g = w.graph();
    assert!(g.is_connected());
    assert!(is_connected_subset(&g, &w.subset));
    assert!(!brute_prefix_sets(&g).contains(&w.subset));
    assert!(!is_dfs_induced(&g, &w.subset, 8).unwrap());
    assert!(!dfs_induced_node_sets(&g, 8).unwrap().contains(&w.subset));
}

#[test]
fn no_smaller_graph_has_a_witness() {
    let w = Witness::parse(&std::fs::read_to_string(FIXTURE).unwrap()).unwrap();
    assert_eq!(search_witness(w.node_count - 1), None);
}
