//! Distributed query execution strategies over the simulated network.
//!
//! Strategy s1 (top-down) broadcasts the query's label set once, downloads
//! every matching edge, and evaluates locally on the deduplicated result.
//! Strategy s2 (bottom-up) evaluates locally from the start, issuing one
//! neighbors broadcast per traversal step; a cache keyed by (node, label
//! set) suppresses repeated identical broadcasts.
//!
//! Both return the answers together with a [`CostRecord`] holding the exact
//! symbol counts the decision rule in [`crate::cost`] consumes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::engine::{
    eval_multi_source, eval_single_source, EdgeSource, EvalOptions, QueryResult,
};
use crate::error::{Error, Result};
use crate::graph::{ExtEdge, Label, LabelSet, NodeId};
use crate::netsim::{BroadcastQuery, PeerNetwork, ResponsePayload};
use crate::query::{Query, QueryKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    S1,
    S2,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::S1 => write!(f, "s1"),
            Strategy::S2 => write!(f, "s2"),
        }
    }
}

/// Exact cost factors of one strategy run. `d_s1` is only set for s1 runs,
/// `q_bc`/`d_s2` only for s2 runs; all data amounts count three symbols per
/// edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostRecord {
    pub strategy: Strategy,
    /// Distinct labels in the query expression.
    pub q_lbl: u64,
    /// Symbols of distinct matching edges downloaded by s1.
    pub d_s1: Option<u64>,
    /// Symbols broadcast by s2 (sum of distinct neighbor-query sizes).
    pub q_bc: Option<u64>,
    /// Symbols of distinct extended edges retrieved by s2.
    pub d_s2: Option<u64>,
    /// Broadcast symbols actually sent over every overlay link.
    pub measured_broadcast_symbols: u64,
    /// Response symbols actually sent, replicas included.
    pub measured_unicast_symbols: u64,
    pub distinct_broadcasts: u64,
    pub truncated: bool,
}

impl CostRecord {
    pub fn csv_header() -> &'static str {
        "strategy,q_lbl,d_s1,q_bc,d_s2,measured_broadcast_symbols,measured_unicast_symbols,distinct_broadcasts,truncated"
    }

    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<u64>| v.map_or(String::new(), |x| x.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.strategy,
            self.q_lbl,
            opt(self.d_s1),
            opt(self.q_bc),
            opt(self.d_s2),
            self.measured_broadcast_symbols,
            self.measured_unicast_symbols,
            self.distinct_broadcasts,
            self.truncated
        )
    }
}

/// The subgraph downloaded by s1, indexed for local evaluation. Node ids
/// are those of the original data graph; the node universe is carried along
/// so multi-source evaluation seeds every node.
struct SubGraphSource {
    out: BTreeMap<NodeId, Vec<(Label, NodeId)>>,
    inn: BTreeMap<NodeId, Vec<(Label, NodeId)>>,
    universe: Vec<NodeId>,
}

impl SubGraphSource {
    fn new(edges: &BTreeSet<ExtEdge>, universe: Vec<NodeId>) -> Self {
        let mut out: BTreeMap<NodeId, Vec<(Label, NodeId)>> = BTreeMap::new();
        let mut inn: BTreeMap<NodeId, Vec<(Label, NodeId)>> = BTreeMap::new();
        for (src, label, dst) in edges {
            debug_assert!(!label.is_inverse());
            out.entry(*src).or_default().push((label.clone(), *dst));
            inn.entry(*dst).or_default().push((label.flipped(), *src));
        }
        SubGraphSource { out, inn, universe }
    }
}

impl EdgeSource for SubGraphSource {
    fn neighbors(&mut self, v: NodeId, wanted: &LabelSet) -> Vec<(Label, NodeId)> {
        let mut result = Vec::new();
        if let Some(out) = self.out.get(&v) {
            result.extend(out.iter().filter(|(l, _)| wanted.matches(l)).cloned());
        }
        if let Some(inn) = self.inn.get(&v) {
            result.extend(inn.iter().filter(|(l, _)| wanted.matches(l)).cloned());
        }
        result.sort();
        result
    }

    fn all_nodes(&mut self) -> Vec<NodeId> {
        self.universe.clone()
    }
}

/// Run the top-down strategy: one label broadcast, full local evaluation.
///
/// A query containing the wildcard forces every edge of the graph to be
/// retrieved; that is refused unless `allow_full_retrieval` is set, in
/// which case the broadcast degenerates to all labels of the data.
pub fn run_s1(
    net: &mut PeerNetwork,
    query: &Query,
    allow_full_retrieval: bool,
    opts: &EvalOptions,
) -> Result<(QueryResult, CostRecord)> {
    if query.uses_wildcard && !allow_full_retrieval {
        return Err(Error::Refusal(
            "the query contains a wildcard, so the top-down strategy would retrieve the \
             entire graph; pass allow_full_retrieval to accept that"
                .to_string(),
        ));
    }
    let before = net.ledger().totals();

    let labels: BTreeSet<String> = if query.uses_wildcard {
        net.all_labels().into_iter().collect()
    } else {
        query.distinct_labels.iter().cloned().collect()
    };
    let outcome = net.broadcast(&BroadcastQuery::ByLabels(labels), "s1:by_labels");

    let mut edges: BTreeSet<ExtEdge> = BTreeSet::new();
    for response in outcome.responses {
        if let ResponsePayload::Edges(items) = response.payload {
            edges.extend(items);
        }
    }
    let d_s1 = 3 * edges.len() as u64;

    let mut source = SubGraphSource::new(&edges, net.node_universe().to_vec());
    let result = match query.kind {
        QueryKind::SingleSource(_) => eval_single_source(&mut source, query, opts),
        QueryKind::MultiSource => eval_multi_source(&mut source, query, opts),
    };

    let after = net.ledger().totals();
    let record = CostRecord {
        strategy: Strategy::S1,
        q_lbl: query.label_count(),
        d_s1: Some(d_s1),
        q_bc: None,
        d_s2: None,
        measured_broadcast_symbols: after.broadcast_symbols - before.broadcast_symbols,
        measured_unicast_symbols: after.unicast_symbols - before.unicast_symbols,
        distinct_broadcasts: 1,
        truncated: result.truncated,
    };
    Ok((result, record))
}

/// Edge source that resolves neighbor lookups with broadcasts against the
/// network, caching responses by (node, wanted set).
struct NetSource<'a> {
    net: &'a mut PeerNetwork,
    cache: HashMap<(NodeId, LabelSet), Vec<(Label, NodeId)>>,
    q_bc: u64,
    distinct_broadcasts: u64,
    retrieved: BTreeSet<ExtEdge>,
}

impl<'a> NetSource<'a> {
    fn new(net: &'a mut PeerNetwork) -> Self {
        NetSource {
            net,
            cache: HashMap::new(),
            q_bc: 0,
            distinct_broadcasts: 0,
            retrieved: BTreeSet::new(),
        }
    }
}

impl EdgeSource for NetSource<'_> {
    fn neighbors(&mut self, v: NodeId, wanted: &LabelSet) -> Vec<(Label, NodeId)> {
        let key = (v, wanted.clone());
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        let broadcast = BroadcastQuery::Neighbors(v, wanted.clone());
        self.q_bc += broadcast.size_symbols();
        self.distinct_broadcasts += 1;
        let outcome = self.net.broadcast(&broadcast, "s2:neighbors");

        let mut edges: BTreeSet<ExtEdge> = BTreeSet::new();
        for response in outcome.responses {
            if let ResponsePayload::Edges(items) = response.payload {
                edges.extend(items);
            }
        }
        self.retrieved.extend(edges.iter().cloned());
        let result: Vec<(Label, NodeId)> =
            edges.into_iter().map(|(_, label, n)| (label, n)).collect();
        self.cache.insert(key, result.clone());
        result
    }

    fn all_nodes(&mut self) -> Vec<NodeId> {
        self.net.node_universe().to_vec()
    }
}

/// Run the bottom-up strategy: local product search with one neighbors
/// broadcast per expansion step. Multi-source queries are allowed but issue
/// a broadcast per step for every seed.
pub fn run_s2(
    net: &mut PeerNetwork,
    query: &Query,
    opts: &EvalOptions,
) -> (QueryResult, CostRecord) {
    let before = net.ledger().totals();
    let mut source = NetSource::new(net);
    let result = match query.kind {
        QueryKind::SingleSource(_) => eval_single_source(&mut source, query, opts),
        QueryKind::MultiSource => eval_multi_source(&mut source, query, opts),
    };
    let q_bc = source.q_bc;
    let distinct_broadcasts = source.distinct_broadcasts;
    let d_s2 = 3 * source.retrieved.len() as u64;
    let after = net.ledger().totals();

    let record = CostRecord {
        strategy: Strategy::S2,
        q_lbl: query.label_count(),
        d_s1: None,
        q_bc: Some(q_bc),
        d_s2: Some(d_s2),
        measured_broadcast_symbols: after.broadcast_symbols - before.broadcast_symbols,
        measured_unicast_symbols: after.unicast_symbols - before.unicast_symbols,
        distinct_broadcasts,
        truncated: result.truncated,
    };
    (result, record)
}
