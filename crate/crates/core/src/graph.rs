//! Edge-labeled directed graph, its inverse-extended view, and TSV ingestion.
//!
//! The graph is immutable once built. Node identifiers are arbitrary strings
//! interned to dense integers; edge labels likewise. Inverse edges are never
//! materialized: [`LabeledGraph::extended_neighbors`] answers inverse lookups
//! from the incoming-edge index on demand.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Dense node identifier, valid within the graph (or node universe) that
/// interned it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Traversal direction of a label: forward follows an edge, inverse walks it
/// backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Inverse,
}

/// An edge label together with the direction it is traversed in. An inverse
/// label only ever exists as the mirror of a forward label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub name: String,
    pub direction: Direction,
}

impl Label {
    pub fn forward(name: impl Into<String>) -> Self {
        let name = name.into();
        debug_assert!(!name.is_empty());
        Label {
            name,
            direction: Direction::Forward,
        }
    }

    pub fn inverse(name: impl Into<String>) -> Self {
        let name = name.into();
        debug_assert!(!name.is_empty());
        Label {
            name,
            direction: Direction::Inverse,
        }
    }

    pub fn is_inverse(&self) -> bool {
        self.direction == Direction::Inverse
    }

    /// The same label traversed in the opposite direction.
    pub fn flipped(&self) -> Label {
        Label {
            name: self.name.clone(),
            direction: match self.direction {
                Direction::Forward => Direction::Inverse,
                Direction::Inverse => Direction::Forward,
            },
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::Forward => write!(f, "{}", self.name),
            Direction::Inverse => write!(f, "{}^-1", self.name),
        }
    }
}

/// A set of labels a traversal step is interested in. `any_forward` is the
/// wildcard sentinel: it matches every forward label but no inverse one.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelSet {
    named: BTreeSet<Label>,
    any_forward: bool,
}

impl LabelSet {
    pub fn new() -> Self {
        LabelSet::default()
    }

    pub fn from_labels<I: IntoIterator<Item = Label>>(labels: I) -> Self {
        LabelSet {
            named: labels.into_iter().collect(),
            any_forward: false,
        }
    }

    pub fn insert(&mut self, label: Label) {
        self.named.insert(label);
    }

    pub fn set_any_forward(&mut self) {
        self.any_forward = true;
    }

    pub fn any_forward(&self) -> bool {
        self.any_forward
    }

    pub fn is_empty(&self) -> bool {
        self.named.is_empty() && !self.any_forward
    }

    pub fn matches(&self, label: &Label) -> bool {
        (self.any_forward && label.direction == Direction::Forward) || self.named.contains(label)
    }

    /// Number of symbols this set occupies in a message; the wildcard
    /// sentinel counts as one symbol.
    pub fn symbol_len(&self) -> u64 {
        self.named.len() as u64 + u64::from(self.any_forward)
    }

    /// The named labels, without the wildcard sentinel.
    pub fn iter_named(&self) -> impl Iterator<Item = &Label> {
        self.named.iter()
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in &self.named {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
            first = false;
        }
        if self.any_forward {
            if !first {
                write!(f, ",")?;
            }
            write!(f, ".")?;
        }
        Ok(())
    }
}

/// An edge of the extended graph: forward edges carry a forward label,
/// inverse edges the mirrored label with source and target swapped.
pub type ExtEdge = (NodeId, Label, NodeId);

/// Per-label edge counts over the forward edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelStats {
    pub counts: BTreeMap<String, u64>,
    pub node_count: u64,
    pub edge_count: u64,
}

impl LabelStats {
    pub fn count(&self, label: &str) -> u64 {
        self.counts.get(label).copied().unwrap_or(0)
    }
}

type EdgeTriple = (NodeId, u32, NodeId);

/// Immutable edge-labeled directed graph with out- and in-indexes.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    node_names: Vec<String>,
    node_lookup: HashMap<String, NodeId>,
    label_names: Vec<String>,
    edges: BTreeSet<EdgeTriple>,
    out_index: Vec<Vec<(u32, NodeId)>>,
    in_index: Vec<Vec<(u32, NodeId)>>,
}

impl LabeledGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_names.len() as u32).map(NodeId)
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_lookup.get(name).copied()
    }

    /// Node name, or `None` for ids outside this graph.
    pub fn node_name(&self, id: NodeId) -> Option<&str> {
        self.node_names.get(id.index()).map(|s| s.as_str())
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn label_name(&self, id: u32) -> &str {
        &self.label_names[id as usize]
    }

    pub fn contains_edge(&self, src: NodeId, label: &str, dst: NodeId) -> bool {
        match self.label_id(label) {
            Some(l) => self.edges.contains(&(src, l, dst)),
            None => false,
        }
    }

    fn label_id(&self, name: &str) -> Option<u32> {
        self.label_names
            .iter()
            .position(|n| n == name)
            .map(|i| i as u32)
    }

    /// Forward edges as (src, label id, dst), in sorted id order.
    pub fn edge_triples(&self) -> impl Iterator<Item = EdgeTriple> + '_ {
        self.edges.iter().copied()
    }

    /// Forward edges with resolved label names.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, &str, NodeId)> + '_ {
        self.edges
            .iter()
            .map(|&(s, l, d)| (s, self.label_name(l), d))
    }

    /// Adjacent extended edges of `v` restricted to `wanted`, as
    /// (label, neighbor) pairs sorted by label name, direction, then
    /// neighbor name. Unknown nodes yield an empty list.
    pub fn extended_neighbors(&self, v: NodeId, wanted: &LabelSet) -> Vec<(Label, NodeId)> {
        if wanted.is_empty() {
            return Vec::new();
        }
        let mut result: Vec<(Label, NodeId)> = Vec::new();
        if let Some(out) = self.out_index.get(v.index()) {
            for &(l, dst) in out {
                let label = Label::forward(self.label_name(l));
                if wanted.matches(&label) {
                    result.push((label, dst));
                }
            }
        }
        if let Some(inn) = self.in_index.get(v.index()) {
            for &(l, src) in inn {
                let label = Label::inverse(self.label_name(l));
                if wanted.matches(&label) {
                    result.push((label, src));
                }
            }
        }
        self.sort_neighbor_list(&mut result);
        result
    }

    fn sort_neighbor_list(&self, list: &mut [(Label, NodeId)]) {
        list.sort_by(|(la, na), (lb, nb)| {
            (la, self.node_name(*na))
                .cmp(&(lb, self.node_name(*nb)))
        });
    }

    /// Exact per-label counts over forward edges.
    pub fn label_stats(&self) -> LabelStats {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for &(_, l, _) in &self.edges {
            *counts.entry(self.label_name(l).to_string()).or_insert(0) += 1;
        }
        LabelStats {
            counts,
            node_count: self.node_count() as u64,
            edge_count: self.edge_count() as u64,
        }
    }

    /// Serialize as TSV, edges sorted by source name, label, target name.
    pub fn to_tsv(&self) -> String {
        let mut lines: Vec<(String, String, String)> = self
            .edges()
            .map(|(s, l, d)| {
                (
                    self.node_names[s.index()].clone(),
                    l.to_string(),
                    self.node_names[d.index()].clone(),
                )
            })
            .collect();
        lines.sort();
        let mut out = String::new();
        for (s, l, d) in lines {
            out.push_str(&s);
            out.push('\t');
            out.push_str(&l);
            out.push('\t');
            out.push_str(&d);
            out.push('\n');
        }
        out
    }

    pub fn save_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_tsv())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// Incremental graph construction; duplicate triples collapse silently.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    node_names: Vec<String>,
    node_lookup: HashMap<String, NodeId>,
    label_names: Vec<String>,
    label_lookup: HashMap<String, u32>,
    edges: BTreeSet<EdgeTriple>,
}

impl GraphBuilder {
    pub fn add_node(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.node_lookup.get(name) {
            return id;
        }
        let id = NodeId(self.node_names.len() as u32);
        self.node_names.push(name.to_string());
        self.node_lookup.insert(name.to_string(), id);
        id
    }

    fn add_label(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.label_lookup.get(name) {
            return id;
        }
        let id = self.label_names.len() as u32;
        self.label_names.push(name.to_string());
        self.label_lookup.insert(name.to_string(), id);
        id
    }

    pub fn add_edge(&mut self, src: &str, label: &str, dst: &str) {
        let s = self.add_node(src);
        let l = self.add_label(label);
        let d = self.add_node(dst);
        self.edges.insert((s, l, d));
    }

    pub fn build(self) -> LabeledGraph {
        let n = self.node_names.len();
        let mut out_index = vec![Vec::new(); n];
        let mut in_index = vec![Vec::new(); n];
        for &(s, l, d) in &self.edges {
            out_index[s.index()].push((l, d));
            in_index[d.index()].push((l, s));
        }
        LabeledGraph {
            node_names: self.node_names,
            node_lookup: self.node_lookup,
            label_names: self.label_names,
            edges: self.edges,
            out_index,
            in_index,
        }
    }
}

/// Parse graph TSV text: one `src<TAB>label<TAB>dst` triple per line,
/// `#` starts a comment line, blank lines are skipped.
pub fn parse_tsv(text: &str, origin: &str) -> Result<LabeledGraph> {
    let mut builder = LabeledGraph::builder();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::GraphParse {
                path: origin.to_string(),
                line: idx + 1,
                msg: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(Error::GraphParse {
                path: origin.to_string(),
                line: idx + 1,
                msg: "empty field".to_string(),
            });
        }
        builder.add_edge(fields[0], fields[1], fields[2]);
    }
    Ok(builder.build())
}

/// Load a graph from a TSV file.
pub fn load_graph(path: impl AsRef<Path>) -> Result<LabeledGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_tsv(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> LabeledGraph {
        parse_tsv(
            include_str!("../../../fixtures/fig1a.tsv"),
            "fig1a.tsv",
        )
        .unwrap()
    }

    fn set(labels: &[Label]) -> LabelSet {
        LabelSet::from_labels(labels.iter().cloned())
    }

    #[test]
    fn duplicate_triples_collapse() {
        let g = parse_tsv("1\ta\t2\n1\ta\t2\n1\tb\t4\n", "t").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.node_count(), 3);
    }

    #[test]
    fn empty_file_is_empty_graph() {
        let g = parse_tsv("", "t").unwrap();
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn fixture_has_nine_nodes_fifteen_edges() {
        let g = fixture();
        assert_eq!(g.node_count(), 9);
        assert_eq!(g.edge_count(), 15);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_tsv("1\ta\t2\n1\ta\n", "g.tsv").unwrap_err();
        match err {
            Error::GraphParse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_field_is_rejected() {
        let err = parse_tsv("1\t\t2\n", "g.tsv").unwrap_err();
        match err {
            Error::GraphParse { line, msg, .. } => {
                assert_eq!(line, 1);
                assert!(msg.contains("empty field"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_skip() {
        let g = parse_tsv("# header\n\n1\ta\t2\n", "t").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn inverse_neighbor_lookup() {
        let g = fixture();
        let v5 = g.node_id("5").unwrap();
        let got = g.extended_neighbors(v5, &set(&[Label::inverse("b")]));
        assert_eq!(got, vec![(Label::inverse("b"), g.node_id("4").unwrap())]);
    }

    #[test]
    fn forward_neighbors_sorted() {
        let g = fixture();
        let v1 = g.node_id("1").unwrap();
        let got = g.extended_neighbors(v1, &set(&[Label::forward("a"), Label::forward("b")]));
        assert_eq!(
            got,
            vec![
                (Label::forward("a"), g.node_id("2").unwrap()),
                (Label::forward("b"), g.node_id("4").unwrap()),
            ]
        );
    }

    #[test]
    fn empty_wanted_set_yields_nothing() {
        let g = fixture();
        let v1 = g.node_id("1").unwrap();
        assert!(g.extended_neighbors(v1, &LabelSet::new()).is_empty());
    }

    #[test]
    fn unknown_node_yields_nothing() {
        let g = fixture();
        let got = g.extended_neighbors(NodeId(999), &set(&[Label::forward("a")]));
        assert!(got.is_empty());
    }

    #[test]
    fn wildcard_matches_forward_only() {
        let g = fixture();
        let mut wanted = LabelSet::new();
        wanted.set_any_forward();
        let v5 = g.node_id("5").unwrap();
        // 5 has no outgoing edges, two incoming (a from 2 and 3, b from 4).
        assert!(g.extended_neighbors(v5, &wanted).is_empty());
        let v1 = g.node_id("1").unwrap();
        assert_eq!(g.extended_neighbors(v1, &wanted).len(), 2);
    }

    #[test]
    fn fixture_label_stats() {
        let stats = fixture().label_stats();
        assert_eq!(stats.count("a"), 6);
        assert_eq!(stats.count("b"), 6);
        assert_eq!(stats.count("c"), 3);
        assert_eq!(stats.edge_count, 15);
        assert_eq!(stats.node_count, 9);
    }

    #[test]
    fn empty_graph_stats() {
        let stats = parse_tsv("", "t").unwrap().label_stats();
        assert!(stats.counts.is_empty());
        assert_eq!(stats.edge_count, 0);
        assert_eq!(stats.node_count, 0);
    }

    #[test]
    fn single_edge_stats() {
        let stats = parse_tsv("x\tz\ty\n", "t").unwrap().label_stats();
        assert_eq!(stats.count("z"), 1);
        assert_eq!(stats.edge_count, 1);
    }

    #[test]
    fn tsv_round_trip_is_identity_on_edges() {
        let g = fixture();
        let again = parse_tsv(&g.to_tsv(), "copy").unwrap();
        let a: BTreeSet<_> = g
            .edges()
            .map(|(s, l, d)| {
                (
                    g.node_name(s).unwrap().to_string(),
                    l.to_string(),
                    g.node_name(d).unwrap().to_string(),
                )
            })
            .collect();
        let b: BTreeSet<_> = again
            .edges()
            .map(|(s, l, d)| {
                (
                    again.node_name(s).unwrap().to_string(),
                    l.to_string(),
                    again.node_name(d).unwrap().to_string(),
                )
            })
            .collect();
        assert_eq!(a, b);
    }
}
