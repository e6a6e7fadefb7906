//! Parenthesized serialization of DFS trees.
//!
//! A tree is written in pre-order. After a node come its child subtrees in
//! visit order; every child subtree except the last is wrapped in parentheses
//! and the last one follows bare, so one traversal of the six-node example graph
//! reads `A(BEF)(C)D`. Only the DFS tree is serialized: non-tree edges of the
//! source graph are not represented.
//!
//! The canonical string form concatenates tokens when every node symbol is a
//! single character and otherwise separates all tokens with `|`.

use std::collections::BTreeMap;
use std::fmt;

use crate::dfs::Ordering;
use crate::graph::Graph;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("empty token sequence")]
    Empty,
    #[error("position {0}: `(` with no preceding node")]
    LeadingGroup(usize),
    #[error("position {0}: empty `()` group")]
    EmptyGroup(usize),
    #[error("position {0}: unexpected trailing group")]
    TrailingGroup(usize),
    #[error("position {0}: unexpected `)`")]
    UnexpectedClose(usize),
    #[error("position {0}: unclosed `(`")]
    Unclosed(usize),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("invalid node symbol {0:?}")]
    BadSymbol(String),
    #[error("token id {0} out of range")]
    BadId(usize),
    #[error("parents are not consistent with a pre-order of the visit sequence")]
    InconsistentParents,
    #[error("too many nodes ({0}) for single-character index symbols")]
    TooManyNodes(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Node(String),
    Open,
    Close,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TokenSequence(pub Vec<Token>);

impl TokenSequence {
    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Node symbols in pre-order (parentheses stripped).
    pub fn node_symbols(&self) -> impl Iterator<Item = &str> {
        self.0.iter().filter_map(|t| match t {
            Token::Node(s) => Some(s.as_str()),
            _ => None,
        })
    }

    pub fn to_canonical_string(&self) -> String {
        let short = self.node_symbols().all(|s| s.chars().count() == 1);
        let parts = self.0.iter().map(|t| match t {
            Token::Node(s) => s.as_str(),
            Token::Open => "(",
            Token::Close => ")",
        });
        if short {
            parts.collect()
        } else {
            parts.collect::<Vec<_>>().join("|")
        }
    }

    /// Inverse of [`TokenSequence::to_canonical_string`]. Checks symbols only;
    /// structure is checked by [`decode`].
    pub fn parse(text: &str) -> Result<TokenSequence, CodecError> {
        let pieces: Vec<String> = if text.contains('|') {
            text.split('|').map(str::to_string).collect()
        } else {
            text.chars().map(String::from).collect()
        };
        let mut tokens = Vec::with_capacity(pieces.len());
        for p in pieces {
            tokens.push(match p.as_str() {
                "(" => Token::Open,
                ")" => Token::Close,
                _ => {
                    check_symbol(&p)?;
                    Token::Node(p)
                }
            });
        }
        Ok(TokenSequence(tokens))
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

fn check_symbol(s: &str) -> Result<(), CodecError> {
    if s.is_empty() || s.contains(['(', ')', '|']) || s.chars().any(char::is_whitespace) {
        Err(CodecError::BadSymbol(s.to_string()))
    } else {
        Ok(())
    }
}

const INDEX_ALPHABET: &[u8] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

/// Single-character symbol naming node `index` (`0-9A-Za-z`, so at most 62 nodes).
pub fn index_symbol(index: usize) -> Result<String, CodecError> {
    INDEX_ALPHABET
        .get(index)
        .map(|&b| (b as char).to_string())
        .ok_or(CodecError::TooManyNodes(index + 1))
}

/// Inverse of [`index_symbol`].
pub fn symbol_index(symbol: &str) -> Option<usize> {
    let mut chars = symbol.bytes();
    let b = chars.next()?;
    if chars.next().is_some() {
        return None;
    }
    INDEX_ALPHABET.iter().position(|&x| x == b)
}

/// Serializes the DFS tree of `ordering`, naming nodes through `symbol`.
pub fn encode(
    ordering: &Ordering,
    mut symbol: impl FnMut(usize) -> String,
) -> Result<TokenSequence, CodecError> {
    let visit = ordering.visit();
    if visit.is_empty() {
        return Err(CodecError::Empty);
    }
    let mut position = BTreeMap::new();
    for (i, &v) in visit.iter().enumerate() {
        position.insert(v, i);
    }
    // children by visit position, checked against a pre-order replay
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); visit.len()];
    let mut path: Vec<usize> = Vec::new();
    for (i, p) in ordering.parents().iter().enumerate() {
        match p {
            None if i == 0 => {}
            Some(p) => {
                let pi = *position.get(p).ok_or(CodecError::InconsistentParents)?;
                while path.last().is_some_and(|&top| top != pi) {
                    path.pop();
                }
                if path.is_empty() {
                    return Err(CodecError::InconsistentParents);
                }
                children[pi].push(i);
            }
            None => return Err(CodecError::InconsistentParents),
        }
        path.push(i);
    }

    enum Step {
        Emit(usize),
        Push(Token),
    }
    let mut tokens = Vec::with_capacity(visit.len() * 3);
    let mut work = vec![Step::Emit(0)];
    while let Some(step) = work.pop() {
        match step {
            Step::Push(t) => tokens.push(t),
            Step::Emit(i) => {
                let s = symbol(visit[i]);
                check_symbol(&s)?;
                tokens.push(Token::Node(s));
                let ch = &children[i];
                if let Some((&last, rest)) = ch.split_last() {
                    work.push(Step::Emit(last));
                    for &c in rest.iter().rev() {
                        work.push(Step::Push(Token::Close));
                        work.push(Step::Emit(c));
                        work.push(Step::Push(Token::Open));
                    }
                }
            }
        }
    }
    Ok(TokenSequence(tokens))
}

/// Encodes with node-index symbols (see [`index_symbol`]).
pub fn encode_indices(ordering: &Ordering) -> Result<TokenSequence, CodecError> {
    let mut err = None;
    let ts = encode(ordering, |v| {
        index_symbol(v).unwrap_or_else(|e| {
            err = Some(e);
            "?".into()
        })
    });
    match err {
        Some(e) => Err(e),
        None => ts,
    }
}

/// Encodes with the graph's node labels, falling back to index symbols.
pub fn encode_labeled(g: &Graph, ordering: &Ordering) -> Result<TokenSequence, CodecError> {
    match g.node_labels() {
        Some(labels) => encode(ordering, |v| labels[v].clone()),
        None => encode_indices(ordering),
    }
}

/// A tree rebuilt from its serialization. Node `i` is the `i`-th node in
/// pre-order, so `ordering.visit()` is always `0, 1, .., n-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedTree {
    pub tree: Graph,
    pub ordering: Ordering,
    pub symbols: Vec<String>,
}

pub fn decode(ts: &TokenSequence) -> Result<DecodedTree, CodecError> {
    let tokens = ts.tokens();
    if tokens.is_empty() {
        return Err(CodecError::Empty);
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        parents: Vec::new(),
        symbols: Vec::new(),
    };
    parser.chain(None)?;
    if parser.pos < tokens.len() {
        return Err(match tokens[parser.pos] {
            Token::Close => CodecError::UnexpectedClose(parser.pos),
            _ => CodecError::TrailingGroup(parser.pos),
        });
    }
    let n = parser.symbols.len();
    let edges: Vec<_> = parser
        .parents
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.map(|p| (p, i)))
        .collect();
    let tree = Graph::from_edges(n, &edges)
        .and_then(|g| g.with_node_labels(parser.symbols.clone()))
        .expect("parser builds a tree");
    let ordering = Ordering::from_parts((0..n).collect(), parser.parents)
        .expect("parents precede children in pre-order");
    Ok(DecodedTree {
        tree,
        ordering,
        symbols: parser.symbols,
    })
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    parents: Vec<Option<usize>>,
    symbols: Vec<String>,
}

impl Parser<'_> {
    /// node ( '(' chain ')' )* [chain]; the bare tail is mandatory after groups.
    fn chain(&mut self, mut parent: Option<usize>) -> Result<(), CodecError> {
        loop {
            let node = match self.tokens.get(self.pos) {
                Some(Token::Node(s)) => {
                    self.symbols.push(s.clone());
                    self.parents.push(parent);
                    self.pos += 1;
                    self.symbols.len() - 1
                }
                Some(Token::Open) => return Err(CodecError::LeadingGroup(self.pos)),
                Some(Token::Close) => return Err(CodecError::UnexpectedClose(self.pos)),
                None => return Err(CodecError::Empty),
            };
            let mut last_group = None;
            while let Some(Token::Open) = self.tokens.get(self.pos) {
                let open = self.pos;
                self.pos += 1;
                match self.tokens.get(self.pos) {
                    Some(Token::Close) => return Err(CodecError::EmptyGroup(open)),
                    None => return Err(CodecError::Unclosed(open)),
                    _ => {}
                }
                self.chain(Some(node))?;
                match self.tokens.get(self.pos) {
                    Some(Token::Close) => self.pos += 1,
                    _ => return Err(CodecError::Unclosed(open)),
                }
                last_group = Some(open);
            }
            match self.tokens.get(self.pos) {
                Some(Token::Node(_)) => parent = Some(node),
                _ => {
                    return match last_group {
                        Some(open) => Err(CodecError::TrailingGroup(open)),
                        None => Ok(()),
                    }
                }
            }
        }
    }
}

pub const BOS: usize = 0;
pub const EOS: usize = 1;
pub const OPEN: usize = 2;
pub const CLOSE: usize = 3;
/// The single node token of an anonymized vocabulary.
pub const ANON_NODE: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VocabMode {
    /// Every node symbol maps to one shared token.
    Anonymized,
    /// One token per alphabet symbol.
    Labeled,
}

/// Dense token ids: `0 = BOS`, `1 = EOS`, `2 = "("`, `3 = ")"`, then node symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    mode: VocabMode,
    symbols: Vec<String>,
}

impl Vocabulary {
    pub fn anonymized() -> Vocabulary {
        Vocabulary {
            mode: VocabMode::Anonymized,
            symbols: vec![ANON_NODE.to_string()],
        }
    }

    /// Labeled vocabulary over the given alphabet (sorted, deduplicated).
    pub fn labeled<S: Into<String>>(alphabet: impl IntoIterator<Item = S>) -> Result<Vocabulary, CodecError> {
        let mut symbols: Vec<String> = alphabet.into_iter().map(Into::into).collect();
        symbols.sort();
        symbols.dedup();
        for s in &symbols {
            check_symbol(s)?;
        }
        Ok(Vocabulary {
            mode: VocabMode::Labeled,
            symbols,
        })
    }

    pub fn mode(&self) -> VocabMode {
        self.mode
    }

    /// Node symbols in id order (ids start at 4).
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn size(&self) -> usize {
        4 + self.symbols.len()
    }

    pub fn token_id(&self, token: &Token) -> Result<usize, CodecError> {
        match token {
            Token::Open => Ok(OPEN),
            Token::Close => Ok(CLOSE),
            Token::Node(s) => match self.mode {
                VocabMode::Anonymized => Ok(4),
                VocabMode::Labeled => self
                    .symbols
                    .binary_search(s)
                    .map(|i| 4 + i)
                    .map_err(|_| CodecError::UnknownSymbol(s.clone())),
            },
        }
    }

    /// Token for a non-control id; `None` for BOS and EOS.
    pub fn token(&self, id: usize) -> Result<Option<Token>, CodecError> {
        match id {
            BOS | EOS => Ok(None),
            OPEN => Ok(Some(Token::Open)),
            CLOSE => Ok(Some(Token::Close)),
            _ => self
                .symbols
                .get(id - 4)
                .map(|s| Some(Token::Node(s.clone())))
                .ok_or(CodecError::BadId(id)),
        }
    }

    pub fn token_name(&self, id: usize) -> String {
        match id {
            BOS => "<bos>".into(),
            EOS => "<eos>".into(),
            OPEN => "(".into(),
            CLOSE => ")".into(),
            _ => self.symbols.get(id - 4).cloned().unwrap_or_else(|| format!("<{id}?>")),
        }
    }
}

/// `BOS`, one id per token, `EOS`.
pub fn tokenize(ts: &TokenSequence, vocab: &Vocabulary) -> Result<Vec<usize>, CodecError> {
    let mut ids = Vec::with_capacity(ts.len() + 2);
    ids.push(BOS);
    for t in ts.tokens() {
        ids.push(vocab.token_id(t)?);
    }
    ids.push(EOS);
    Ok(ids)
}

/// Tokens between a leading `BOS` (optional) and the first `EOS` (optional).
pub fn detokenize(ids: &[usize], vocab: &Vocabulary) -> Result<TokenSequence, CodecError> {
    let body = ids.strip_prefix(&[BOS]).unwrap_or(ids);
    let mut tokens = Vec::new();
    for &id in body {
        if id == EOS {
            break;
        }
        if id >= vocab.size() {
            return Err(CodecError::BadId(id));
        }
        match vocab.token(id)? {
            Some(t) => tokens.push(t),
            None => return Err(CodecError::BadId(id)),
        }
    }
    Ok(TokenSequence(tokens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfs::tests::six_node_example;

    fn seq(text: &str) -> TokenSequence {
        TokenSequence::parse(text).unwrap()
    }

    #[test]
    fn example_strings() {
        let g = six_node_example();
        let left = Ordering::from_sequence(&g, &[0, 1, 4, 5, 2, 3]).unwrap();
        let right = Ordering::from_sequence(&g, &[0, 2, 1, 5, 4, 3]).unwrap();
        assert_eq!(encode_labeled(&g, &left).unwrap().to_string(), "A(BEF)(C)D");
        assert_eq!(encode_labeled(&g, &right).unwrap().to_string(), "A(C)(BFE)D");
    }

    #[test]
    fn single_node() {
        let o = Ordering::from_parts(vec![0], vec![None]).unwrap();
        let ts = encode(&o, |_| "X".into()).unwrap();
        assert_eq!(ts.tokens(), &[Token::Node("X".into())]);
        let d = decode(&ts).unwrap();
        assert_eq!(d.tree.node_count(), 1);
    }

    #[test]
    fn bare_last_child_string_decodes() {
        let d = decode(&seq("BA(CF)D")).unwrap();
        assert_eq!(d.symbols, ["B", "A", "C", "F", "D"]);
        // B-A, A-C, C-F, A-D in pre-order indices
        assert_eq!(d.tree.edges(), vec![(0, 1), (1, 2), (1, 4), (2, 3)]);
        assert_eq!(d.ordering.visit(), &[0, 1, 2, 3, 4]);
        assert_eq!(encode(&d.ordering, |i| d.symbols[i].clone()).unwrap().to_string(), "BA(CF)D");
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert_eq!(decode(&seq("A(B)")), Err(CodecError::TrailingGroup(1)));
        assert_eq!(decode(&seq("(A)B")), Err(CodecError::LeadingGroup(0)));
        assert_eq!(decode(&seq("A()B")), Err(CodecError::EmptyGroup(1)));
        assert_eq!(decode(&seq("A(B")), Err(CodecError::Unclosed(1)));
        assert_eq!(decode(&seq("AB)")), Err(CodecError::UnexpectedClose(2)));
        assert_eq!(decode(&seq("A(B)(C")), Err(CodecError::Unclosed(4)));
        assert_eq!(decode(&TokenSequence::default()), Err(CodecError::Empty));
    }

    #[test]
    fn multi_character_symbols_use_separators() {
        let ts = seq("Cl|(|C|)|N");
        assert_eq!(ts.tokens().len(), 5);
        assert_eq!(ts.to_canonical_string(), "Cl|(|C|)|N");
        assert_eq!(decode(&ts).unwrap().symbols, ["Cl", "C", "N"]);
    }

    #[test]
    fn inconsistent_parents_rejected() {
        // 3 claims parent 1 after 1's subtree was closed by 2
        let o = Ordering::from_parts(vec![0, 1, 2, 3], vec![None, Some(0), Some(0), Some(1)]).unwrap();
        assert_eq!(encode_indices(&o), Err(CodecError::InconsistentParents));
    }

    #[test]
    fn tokenize_examples() {
        let anon = Vocabulary::anonymized();
        let ids = tokenize(&seq("A(B)C"), &anon).unwrap();
        assert_eq!(ids, vec![BOS, 4, OPEN, 4, CLOSE, 4, EOS]);
        assert_eq!(tokenize(&TokenSequence::default(), &anon).unwrap(), vec![BOS, EOS]);
        let labeled = Vocabulary::labeled(["A", "B"]).unwrap();
        assert_eq!(
            tokenize(&seq("AQ"), &labeled),
            Err(CodecError::UnknownSymbol("Q".into()))
        );
        assert_eq!(tokenize(&seq("BA"), &labeled).unwrap(), vec![BOS, 5, 4, EOS]);
        assert_eq!(detokenize(&[BOS, 5, 2, 4, 3, 4, EOS, 5], &labeled).unwrap(), seq("B(A)A"));
    }

    #[test]
    fn index_symbols_round_trip() {
        for i in 0..62 {
            assert_eq!(symbol_index(&index_symbol(i).unwrap()), Some(i));
        }
        assert!(index_symbol(62).is_err());
    }
}
