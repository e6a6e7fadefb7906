use proptest::prelude::*;

use orderless::codec::{
    decode, detokenize, encode, encode_indices, index_symbol, symbol_index, tokenize, CodecError, TokenSequence,
    Vocabulary,
};
use orderless::dfs::{sample_ordering, Ordering};
use orderless::graph::random_tree;

fn tree_and_ordering(n: usize, seed: u64) -> (orderless::graph::Graph, Ordering) {
    let g = random_tree(n, seed).unwrap();
    let o = sample_ordering(&g, None, seed.rotate_left(17)).unwrap();
    (g, o)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn decode_inverts_encode(n in 1usize..=15, seed in any::<u64>()) {
        let (g, o) = tree_and_ordering(n, seed);
        let ts = encode_indices(&o).unwrap();
        let d = decode(&ts).unwrap();
        let original: Vec<usize> = d.symbols.iter().map(|s| symbol_index(s).unwrap()).collect();
        prop_assert_eq!(&original[..], o.visit());
        let mut edges: Vec<(usize, usize)> = d
            .tree
            .edges()
            .into_iter()
            .map(|(a, b)| (original[a].min(original[b]), original[a].max(original[b])))
            .collect();
        edges.sort_unstable();
        prop_assert_eq!(edges, g.edges());
        prop_assert_eq!(encode(&d.ordering, |i| d.symbols[i].clone()).unwrap(), ts);
    }

    #[test]
    fn text_and_id_forms_round_trip(n in 1usize..=15, seed in any::<u64>()) {
        let (_, o) = tree_and_ordering(n, seed);
        let ts = encode_indices(&o).unwrap();
        prop_assert_eq!(TokenSequence::parse(&ts.to_string()).unwrap(), ts.clone());
        let vocab = Vocabulary::labeled((0..15).map(|i| index_symbol(i).unwrap())).unwrap();
        let ids = tokenize(&ts, &vocab).unwrap();
        prop_assert_eq!(ids.len(), ts.len() + 2);
        prop_assert_eq!(detokenize(&ids, &vocab).unwrap(), ts);
    }

    #[test]
    fn anonymized_strings_keep_the_shape(n in 1usize..=15, seed in any::<u64>()) {
        let (_, o) = tree_and_ordering(n, seed);
        let anon = encode(&o, |_| "*".into()).unwrap();
        let shaped = encode_indices(&o).unwrap();
        let d = decode(&anon).unwrap();
        prop_assert_eq!(d.tree.node_count(), n);
        let strip = |s: String| s.chars().map(|c| if c == '(' || c == ')' { c } else { '*' }).collect::<String>();
        prop_assert_eq!(anon.to_string(), strip(shaped.to_string()));
    }
}

#[test]
fn malformed_strings_are_rejected() {
    for (text, ok) in [("A(B)", false), ("(A)B", false), ("A()B", false), ("A(B", false), ("AB)", false), ("A(B)C", true)] {
        let parsed = TokenSequence::parse(text).map_err(|_| ()).and_then(|ts| decode(&ts).map_err(|_| ()));
        assert_eq!(parsed.is_ok(), ok, "{text}");
    }
    assert!(matches!(decode(&TokenSequence::parse("A(B)").unwrap()), Err(CodecError::TrailingGroup(1))));
}
