//! Shared helpers for integration tests: the bundled fixture, random graph
//! and expression generators, a recursive membership matcher, and a
//! fixpoint reachability oracle that is independent of the engine's lazy
//! product search.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rpq_core::graph::{Direction, Label, LabeledGraph, NodeId};
use rpq_core::query::{Query, QueryAutomaton, RegexAst};

pub fn fixture() -> LabeledGraph {
    rpq_core::graph::parse_tsv(include_str!("../../../../fixtures/fig1a.tsv"), "fig1a.tsv")
        .unwrap()
}

/// Random graph over `labels` with up to `max_nodes` nodes. Some nodes stay
/// isolated on purpose.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, labels: &[&str]) -> LabeledGraph {
    let n = rng.random_range(2..=max_nodes);
    let mut builder = LabeledGraph::builder();
    for i in 0..n {
        builder.add_node(&format!("n{i}"));
    }
    let max_edges = (n * n / 2).max(1);
    let m = rng.random_range(0..=max_edges.min(4 * n));
    for _ in 0..m {
        let src = rng.random_range(0..n);
        let dst = rng.random_range(0..n);
        let label = labels[rng.random_range(0..labels.len())];
        builder.add_edge(&format!("n{src}"), label, &format!("n{dst}"));
    }
    builder.build()
}

/// Options for the random expression generator.
#[derive(Clone, Copy)]
pub struct AstGenOptions {
    pub allow_inverse: bool,
    pub allow_wildcard: bool,
}

/// Random expression tree of bounded depth in the parser's canonical shape
/// (sequence nodes always have at least two children).
pub fn random_ast(
    rng: &mut ChaCha8Rng,
    depth: u32,
    labels: &[&str],
    opts: AstGenOptions,
) -> RegexAst {
    let leaf = |rng: &mut ChaCha8Rng| -> RegexAst {
        if opts.allow_wildcard && rng.random_bool(0.1) {
            return RegexAst::Wildcard;
        }
        let name = labels[rng.random_range(0..labels.len())];
        if opts.allow_inverse && rng.random_bool(0.25) {
            RegexAst::Atom(Label::inverse(name))
        } else {
            RegexAst::Atom(Label::forward(name))
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.random_range(0..10) {
        0..=3 => leaf(rng),
        4 | 5 => {
            let len = rng.random_range(2..=3);
            RegexAst::Concat(
                (0..len)
                    .map(|_| random_ast(rng, depth - 1, labels, opts))
                    .collect(),
            )
        }
        6 | 7 => {
            let len = rng.random_range(2..=3);
            RegexAst::Alt(
                (0..len)
                    .map(|_| random_ast(rng, depth - 1, labels, opts))
                    .collect(),
            )
        }
        8 => RegexAst::Star(Box::new(random_ast(rng, depth - 1, labels, opts))),
        _ => {
            if rng.random_bool(0.5) {
                RegexAst::Plus(Box::new(random_ast(rng, depth - 1, labels, opts)))
            } else {
                RegexAst::Opt(Box::new(random_ast(rng, depth - 1, labels, opts)))
            }
        }
    }
}

/// Recursive membership matcher, the oracle for automaton acceptance.
pub fn ast_matches(ast: &RegexAst, word: &[Label]) -> bool {
    match ast {
        RegexAst::Atom(l) => word.len() == 1 && &word[0] == l,
        RegexAst::Wildcard => word.len() == 1 && word[0].direction == Direction::Forward,
        RegexAst::Concat(children) => concat_matches(children, word),
        RegexAst::Alt(children) => children.iter().any(|c| ast_matches(c, word)),
        RegexAst::Star(c) => {
            word.is_empty()
                || (1..=word.len())
                    .any(|i| ast_matches(c, &word[..i]) && ast_matches(ast, &word[i..]))
        }
        RegexAst::Plus(c) => {
            ast_matches(c, word)
                || (1..=word.len())
                    .any(|i| ast_matches(c, &word[..i]) && ast_matches(ast, &word[i..]))
        }
        RegexAst::Opt(c) => word.is_empty() || ast_matches(c, word),
    }
}

fn concat_matches(children: &[RegexAst], word: &[Label]) -> bool {
    match children {
        [] => word.is_empty(),
        [first, rest @ ..] => (0..=word.len())
            .any(|i| ast_matches(first, &word[..i]) && concat_matches(rest, &word[i..])),
    }
}

/// All words of length at most `max_len` over the alphabet.
pub fn all_words(alphabet: &[Label], max_len: usize) -> Vec<Vec<Label>> {
    let mut words: Vec<Vec<Label>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<Label>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for word in &frontier {
            for symbol in alphabet {
                let mut w = word.clone();
                w.push(symbol.clone());
                next.push(w);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    words
}

/// Reachability oracle over the materialized product relation: propagate
/// automaton-state sets across the full extended edge list until nothing
/// changes. Chaotic iteration over materialized edges, as opposed to the
/// engine's lazy breadth-first expansion with precomputed closures.
pub struct FixpointOracle<'g> {
    graph: &'g LabeledGraph,
    ext_edges: Vec<(NodeId, Label, NodeId)>,
}

impl<'g> FixpointOracle<'g> {
    pub fn new(graph: &'g LabeledGraph) -> Self {
        let mut ext_edges = Vec::new();
        for (src, name, dst) in graph.edges() {
            ext_edges.push((src, Label::forward(name), dst));
            ext_edges.push((dst, Label::inverse(name), src));
        }
        FixpointOracle { graph, ext_edges }
    }

    pub fn single_source(&self, nfa: &QueryAutomaton, start: NodeId) -> BTreeSet<NodeId> {
        let n = self.graph.node_count();
        let mut states: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
        if start.index() < n {
            states[start.index()].insert(nfa.initial());
        }
        loop {
            let mut changed = false;
            // Epsilon propagation within each node.
            for v in 0..n {
                let current: Vec<u32> = states[v].iter().copied().collect();
                for q in current {
                    for &q2 in nfa.epsilon(q) {
                        changed |= states[v].insert(q2);
                    }
                }
            }
            // Symbol propagation across every extended edge.
            for (u, label, w) in &self.ext_edges {
                let current: Vec<u32> = states[u.index()].iter().copied().collect();
                for q in current {
                    for (sym, q2) in nfa.transitions(q) {
                        if sym.matches(label) {
                            changed |= states[w.index()].insert(*q2);
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut answers = BTreeSet::new();
        for v in 0..n {
            // One more epsilon closure is folded into the loop above; an
            // accepting state reachable by epsilon alone is already there.
            if states[v].iter().any(|q| nfa.accepting().contains(q)) {
                answers.insert(NodeId(v as u32));
            }
        }
        // A start node outside the graph can still answer itself on an
        // epsilon-accepting query.
        if start.index() >= n && nfa.accepts_epsilon() {
            answers.insert(start);
        }
        answers
    }

    pub fn multi_source(&self, nfa: &QueryAutomaton) -> BTreeSet<(NodeId, NodeId)> {
        let mut pairs = BTreeSet::new();
        for seed in self.graph.node_ids() {
            for answer in self.single_source(nfa, seed) {
                pairs.insert((seed, answer));
            }
        }
        pairs
    }
}

/// A query over the alphabet used by [`random_graph`].
pub fn query_from_ast(ast: &RegexAst, kind: rpq_core::query::QueryKind) -> Query {
    Query::from_ast(ast, kind)
}
