//! Lazy product-automaton evaluation of path queries.
//!
//! The product of the query automaton and the data graph is never
//! materialized: a breadth-first search expands (automaton state, node)
//! pairs on demand, pulling adjacent edges from an [`EdgeSource`]. The same
//! engine runs over a local graph, a simulated peer network, or a random
//! generative model; only the edge source changes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::graph::{ExtEdge, Label, LabelSet, LabeledGraph, NodeId};
use crate::query::{Query, QueryKind, StateId};

/// Provider of adjacency data for the product search.
///
/// Implementations must return identical results for repeated calls with
/// the same arguments within one query execution, and must list neighbors
/// in a deterministic order.
pub trait EdgeSource {
    /// Extended edges adjacent to `v` whose label is in `wanted`, as
    /// (label, neighbor) pairs in a deterministic order.
    fn neighbors(&mut self, v: NodeId, wanted: &LabelSet) -> Vec<(Label, NodeId)>;

    /// The node universe, used only to seed multi-source evaluation.
    fn all_nodes(&mut self) -> Vec<NodeId>;
}

impl EdgeSource for &LabeledGraph {
    fn neighbors(&mut self, v: NodeId, wanted: &LabelSet) -> Vec<(Label, NodeId)> {
        self.extended_neighbors(v, wanted)
    }

    fn all_nodes(&mut self) -> Vec<NodeId> {
        self.node_ids().collect()
    }
}

/// Query answers: nodes for single-source, ordered pairs for multi-source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answers {
    Nodes(BTreeSet<NodeId>),
    Pairs(BTreeSet<(NodeId, NodeId)>),
}

impl Answers {
    pub fn len(&self) -> usize {
        match self {
            Answers::Nodes(s) => s.len(),
            Answers::Pairs(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_nodes(&self) -> &BTreeSet<NodeId> {
        match self {
            Answers::Nodes(s) => s,
            Answers::Pairs(_) => panic!("multi-source answers are pairs"),
        }
    }

    pub fn as_pairs(&self) -> &BTreeSet<(NodeId, NodeId)> {
        match self {
            Answers::Pairs(s) => s,
            Answers::Nodes(_) => panic!("single-source answers are nodes"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    pub answers: Answers,
    /// Distinct (automaton state, node) pairs reached across the run.
    pub visited_states: u64,
    /// Distinct extended edges pulled from the source.
    pub traversed_edges: BTreeSet<ExtEdge>,
    /// One witness path per answer, keyed by (seed, answer); only present
    /// when requested in [`EvalOptions`].
    pub witnesses: Option<BTreeMap<(NodeId, NodeId), Vec<ExtEdge>>>,
    /// True when a budget cap stopped the search early; answers may be
    /// incomplete.
    pub truncated: bool,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub witnesses: bool,
    /// Cap on distinct (state, node) pairs.
    pub max_states: Option<u64>,
    /// Cap on distinct extended edges pulled from the source.
    pub max_edges: Option<u64>,
}

struct Search<'a, S: EdgeSource> {
    src: &'a mut S,
    query: &'a Query,
    opts: &'a EvalOptions,
    distinct: HashSet<(StateId, NodeId)>,
    traversed: BTreeSet<ExtEdge>,
    witnesses: BTreeMap<(NodeId, NodeId), Vec<ExtEdge>>,
    truncated: bool,
}

impl<'a, S: EdgeSource> Search<'a, S> {
    fn new(src: &'a mut S, query: &'a Query, opts: &'a EvalOptions) -> Self {
        Search {
            src,
            query,
            opts,
            distinct: HashSet::new(),
            traversed: BTreeSet::new(),
            witnesses: BTreeMap::new(),
            truncated: false,
        }
    }

    fn over_state_budget(&self) -> bool {
        self.opts
            .max_states
            .is_some_and(|cap| self.distinct.len() as u64 >= cap)
    }

    fn over_edge_budget(&self) -> bool {
        self.opts
            .max_edges
            .is_some_and(|cap| self.traversed.len() as u64 >= cap)
    }

    /// Breadth-first search of the lazy product from one seed node.
    fn run_seed(&mut self, seed: NodeId, answers: &mut BTreeSet<NodeId>) {
        let nfa = &self.query.automaton;
        let initial = nfa.initial();
        let mut visited: HashSet<(StateId, NodeId)> = HashSet::new();
        let mut parents: HashMap<(StateId, NodeId), ((StateId, NodeId), ExtEdge)> = HashMap::new();
        let mut queue: VecDeque<(StateId, NodeId)> = VecDeque::new();

        visited.insert((initial, seed));
        self.distinct.insert((initial, seed));
        queue.push_back((initial, seed));

        while let Some((q, v)) = queue.pop_front() {
            if nfa.closure_accepting(q) && answers.insert(v) && self.opts.witnesses {
                let path = reconstruct(&parents, (initial, seed), (q, v));
                self.witnesses.insert((seed, v), path);
            }
            let wanted = nfa.closure_wanted(q);
            if wanted.is_empty() {
                continue;
            }
            for (label, w) in self.src.neighbors(v, wanted) {
                self.traversed.insert((v, label.clone(), w));
                if self.over_edge_budget() {
                    self.truncated = true;
                    return;
                }
                for (sym, q2) in nfa.closure_transitions(q) {
                    if !sym.matches(&label) {
                        continue;
                    }
                    if visited.insert((*q2, w)) {
                        self.distinct.insert((*q2, w));
                        if self.opts.witnesses {
                            parents.insert((*q2, w), ((q, v), (v, label.clone(), w)));
                        }
                        queue.push_back((*q2, w));
                        if self.over_state_budget() {
                            self.truncated = true;
                            return;
                        }
                    }
                }
            }
        }
    }

    fn finish(self, answers: Answers) -> QueryResult {
        QueryResult {
            answers,
            visited_states: self.distinct.len() as u64,
            traversed_edges: self.traversed,
            witnesses: if self.opts.witnesses {
                Some(self.witnesses)
            } else {
                None
            },
            truncated: self.truncated,
        }
    }
}

fn reconstruct(
    parents: &HashMap<(StateId, NodeId), ((StateId, NodeId), ExtEdge)>,
    seed: (StateId, NodeId),
    target: (StateId, NodeId),
) -> Vec<ExtEdge> {
    let mut path = Vec::new();
    let mut cur = target;
    while cur != seed {
        let (prev, edge) = parents
            .get(&cur)
            .expect("every visited pair except the seed has a parent");
        path.push(edge.clone());
        cur = *prev;
    }
    path.reverse();
    path
}

/// Evaluate a single-source query. The start node need not exist in the
/// data; probing an unknown node simply finds no edges.
pub fn eval_single_source<S: EdgeSource>(
    src: &mut S,
    query: &Query,
    opts: &EvalOptions,
) -> QueryResult {
    let QueryKind::SingleSource(start) = query.kind else {
        panic!("eval_single_source requires a single-source query");
    };
    let mut search = Search::new(src, query, opts);
    let mut answers = BTreeSet::new();
    search.run_seed(start, &mut answers);
    search.finish(Answers::Nodes(answers))
}

/// Evaluate a multi-source query by seeding the single-source search from
/// every node of the source universe. The per-seed visited sets are
/// independent; the edge source (and its cache, if any) is shared.
pub fn eval_multi_source<S: EdgeSource>(
    src: &mut S,
    query: &Query,
    opts: &EvalOptions,
) -> QueryResult {
    assert!(
        matches!(query.kind, QueryKind::MultiSource),
        "eval_multi_source requires a multi-source query"
    );
    let mut seeds = src.all_nodes();
    seeds.sort();
    let mut search = Search::new(src, query, opts);
    let mut pairs = BTreeSet::new();
    for seed in seeds {
        let mut answers = BTreeSet::new();
        search.run_seed(seed, &mut answers);
        pairs.extend(answers.into_iter().map(|a| (seed, a)));
        if search.truncated {
            break;
        }
    }
    search.finish(Answers::Pairs(pairs))
}

/// Evaluate against a local graph, dispatching on the query kind.
pub fn eval_local(graph: &LabeledGraph, query: &Query, opts: &EvalOptions) -> QueryResult {
    let mut src = graph;
    match query.kind {
        QueryKind::SingleSource(_) => eval_single_source(&mut src, query, opts),
        QueryKind::MultiSource => eval_multi_source(&mut src, query, opts),
    }
}

/// Nodes with at least one adjacent extended edge matching a possible first
/// symbol of the query; only these can incur non-zero evaluation cost.
pub fn valid_start_nodes(graph: &LabeledGraph, query: &Query) -> BTreeSet<NodeId> {
    let firsts = query.first_labels();
    graph
        .node_ids()
        .filter(|&v| !graph.extended_neighbors(v, firsts).is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_tsv, Label};
    use crate::query::{ClassFile, Query};

    fn fixture() -> LabeledGraph {
        parse_tsv(include_str!("../../../fixtures/fig1a.tsv"), "fig1a.tsv").unwrap()
    }

    fn single(g: &LabeledGraph, start: &str, expr: &str) -> Query {
        let id = g.node_id(start).unwrap_or(NodeId(u32::MAX));
        Query::parse(expr, &ClassFile::empty(), QueryKind::SingleSource(id)).unwrap()
    }

    fn multi(expr: &str) -> Query {
        Query::parse(expr, &ClassFile::empty(), QueryKind::MultiSource).unwrap()
    }

    fn names(g: &LabeledGraph, ids: &BTreeSet<NodeId>) -> Vec<String> {
        let mut v: Vec<String> = ids
            .iter()
            .map(|&id| g.node_name(id).unwrap().to_string())
            .collect();
        v.sort();
        v
    }

    #[test]
    fn fixture_star_concat_answers() {
        let g = fixture();
        let r = eval_local(&g, &single(&g, "1", "a* b b"), &EvalOptions::default());
        assert_eq!(names(&g, r.answers.as_nodes()), vec!["5", "8"]);
        assert!(!r.truncated);
    }

    #[test]
    fn fixture_inverse_answers() {
        let g = fixture();
        let r = eval_local(&g, &single(&g, "1", "a* b^-1"), &EvalOptions::default());
        assert_eq!(names(&g, r.answers.as_nodes()), vec!["4", "7"]);
    }

    #[test]
    fn fixture_multi_source_pairs() {
        let g = fixture();
        let r = eval_local(&g, &multi("a c (a|b)"), &EvalOptions::default());
        let got: Vec<(String, String)> = r
            .answers
            .as_pairs()
            .iter()
            .map(|&(s, d)| {
                (
                    g.node_name(s).unwrap().to_string(),
                    g.node_name(d).unwrap().to_string(),
                )
            })
            .collect();
        let expected = vec![
            ("1".to_string(), "5".to_string()),
            ("1".to_string(), "8".to_string()),
            ("2".to_string(), "7".to_string()),
            ("9".to_string(), "5".to_string()),
            ("9".to_string(), "8".to_string()),
        ];
        assert_eq!(got, expected);
    }

    #[test]
    fn no_matching_path_from_start() {
        let g = fixture();
        let r = eval_local(&g, &single(&g, "7", "c c"), &EvalOptions::default());
        assert!(r.answers.is_empty());
    }

    #[test]
    fn multi_source_no_adjacent_pair() {
        let g = fixture();
        let r = eval_local(&g, &multi("c c"), &EvalOptions::default());
        assert!(r.answers.is_empty());
    }

    #[test]
    fn absent_label_is_empty() {
        let g = fixture();
        let r = eval_local(&g, &multi("z"), &EvalOptions::default());
        assert!(r.answers.is_empty());
    }

    #[test]
    fn absent_start_node_probes_nothing() {
        let g = fixture();
        let r = eval_local(&g, &single(&g, "nope", "a b"), &EvalOptions::default());
        assert!(r.answers.is_empty());
        assert!(r.traversed_edges.is_empty());
    }

    #[test]
    fn epsilon_query_reports_self_pairs() {
        let g = fixture();
        let r = eval_local(&g, &multi("a*"), &EvalOptions::default());
        for v in g.node_ids() {
            assert!(r.answers.as_pairs().contains(&(v, v)));
        }
    }

    #[test]
    fn valid_start_nodes_examples() {
        let g = fixture();
        assert_eq!(
            names(
                &g,
                &valid_start_nodes(&g, &multi("a c (a|b)"))
            ),
            vec!["1", "2", "3", "6", "9"]
        );
        assert_eq!(
            names(&g, &valid_start_nodes(&g, &multi("c z"))),
            vec!["2", "4", "6"]
        );
        let empty = parse_tsv("", "t").unwrap();
        assert!(valid_start_nodes(&empty, &multi("a")).is_empty());
    }

    #[test]
    fn determinism_including_counters() {
        let g = fixture();
        let a = eval_local(&g, &multi("a c (a|b)"), &EvalOptions::default());
        let b = eval_local(&g, &multi("a c (a|b)"), &EvalOptions::default());
        assert_eq!(a, b);
    }

    #[test]
    fn visited_states_within_product_bound() {
        let g = fixture();
        let q = single(&g, "1", "a* b b");
        let r = eval_local(&g, &q, &EvalOptions::default());
        let bound = (q.automaton.state_count() * g.node_count()) as u64;
        assert!(r.visited_states <= bound);
    }

    #[test]
    fn witnesses_spell_accepted_words() {
        let g = fixture();
        let q = single(&g, "1", "a* b b");
        let opts = EvalOptions {
            witnesses: true,
            ..Default::default()
        };
        let r = eval_local(&g, &q, &opts);
        let witnesses = r.witnesses.unwrap();
        assert_eq!(witnesses.len(), r.answers.as_nodes().len());
        for ((_, answer), path) in &witnesses {
            let word: Vec<Label> = path.iter().map(|(_, l, _)| l.clone()).collect();
            assert!(q.automaton.accepts(&word), "witness for {answer}");
            assert_eq!(path.last().map(|(_, _, d)| *d), Some(*answer));
        }
    }

    #[test]
    fn edge_budget_truncates() {
        let g = fixture();
        let q = single(&g, "1", "a* b b");
        let opts = EvalOptions {
            max_edges: Some(3),
            ..Default::default()
        };
        let r = eval_local(&g, &q, &opts);
        assert!(r.truncated);
        assert!(r.traversed_edges.len() <= 3);
    }

    #[test]
    fn cyclic_graph_terminates() {
        // 2-6-9-2 is a cycle in the fixture; a* explores it fully.
        let g = fixture();
        let r = eval_local(&g, &single(&g, "2", "a*"), &EvalOptions::default());
        let reached = names(&g, r.answers.as_nodes());
        assert_eq!(reached, vec!["2", "5", "6", "9"]);
    }
}
