//! Deterministic simulation of a peer network holding arbitrarily
//! distributed, replicated graph data.
//!
//! Peers are connected by an undirected overlay topology. Queries reach all
//! peers by flooding: on first receipt a peer forwards the message to every
//! neighbor except the sender, so one broadcast costs exactly
//! `2*N_c - N_p + 1` messages on a connected overlay with `N_p` peers and
//! `N_c` links. Peers answer with unicast responses whose cost is counted
//! in symbols: one symbol per label or node identifier, three per edge.
//!
//! Note on degree conventions: the average degree reported here is
//! `d = N_c / N_p`, i.e. links per peer, which is half the per-peer count
//! of incident links.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num::BigRational;
use rand::seq::index::sample as index_sample;

use crate::error::{Error, Result};
use crate::graph::{ExtEdge, Label, LabelSet, LabeledGraph, NodeId};
use crate::rng::derive_rng;

pub type PeerId = u32;

/// Overlay topology generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologyKind {
    /// Every peer has exactly `degree` incident links.
    RandomRegular { degree: u32 },
    /// Each peer pair is linked independently with probability `edge_prob`;
    /// regenerated until connected.
    ErdosRenyi { edge_prob: f64 },
    /// Peer 0 is linked to every other peer.
    Star,
}

/// A connected undirected overlay of peers.
#[derive(Debug, Clone)]
pub struct Topology {
    peer_count: u32,
    links: BTreeSet<(PeerId, PeerId)>,
    adjacency: Vec<Vec<PeerId>>,
}

impl Topology {
    pub fn peer_count(&self) -> u32 {
        self.peer_count
    }

    pub fn link_count(&self) -> u64 {
        self.links.len() as u64
    }

    pub fn links(&self) -> &BTreeSet<(PeerId, PeerId)> {
        &self.links
    }

    pub fn neighbors(&self, p: PeerId) -> &[PeerId] {
        &self.adjacency[p as usize]
    }

    /// Links per peer, `N_c / N_p`.
    pub fn avg_degree(&self) -> BigRational {
        BigRational::new(self.link_count().into(), u64::from(self.peer_count).into())
    }

    pub fn generate(kind: TopologyKind, peers: u32, seed: u64) -> Result<Topology> {
        if peers < 2 {
            return Err(Error::Config(format!(
                "need at least 2 peers, got {peers}"
            )));
        }
        let mut rng = derive_rng(seed, 0);
        match kind {
            TopologyKind::Star => {
                let links = (1..peers).map(|p| (0, p)).collect();
                Ok(Topology::from_links(peers, links))
            }
            TopologyKind::ErdosRenyi { edge_prob } => {
                if !(0.0..=1.0).contains(&edge_prob) {
                    return Err(Error::Config(format!(
                        "edge probability {edge_prob} outside [0,1]"
                    )));
                }
                for _ in 0..100 {
                    let mut links = BTreeSet::new();
                    for a in 0..peers {
                        for b in (a + 1)..peers {
                            if rand::Rng::random_bool(&mut rng, edge_prob) {
                                links.insert((a, b));
                            }
                        }
                    }
                    let topo = Topology::from_links(peers, links);
                    if topo.is_connected() {
                        return Ok(topo);
                    }
                }
                Err(Error::Config(format!(
                    "could not generate a connected overlay with edge probability {edge_prob}"
                )))
            }
            TopologyKind::RandomRegular { degree } => {
                if degree == 0 || degree >= peers {
                    return Err(Error::Config(format!(
                        "regular degree {degree} impossible for {peers} peers"
                    )));
                }
                if (degree as u64 * peers as u64) % 2 != 0 {
                    return Err(Error::Config(format!(
                        "degree {degree} times {peers} peers is odd; no regular overlay exists"
                    )));
                }
                // Configuration model: pair up degree stubs per peer. A
                // self-loop or duplicate link is repaired by swapping the
                // offending stub with a later one; if no swap works the
                // whole pairing restarts.
                'attempt: for _ in 0..200 {
                    let mut stubs: Vec<PeerId> = (0..peers)
                        .flat_map(|p| std::iter::repeat_n(p, degree as usize))
                        .collect();
                    rand::seq::SliceRandom::shuffle(&mut stubs[..], &mut rng);
                    let mut links = BTreeSet::new();
                    let mut i = 0;
                    while i < stubs.len() {
                        let a = stubs[i];
                        let valid = |b: PeerId, links: &BTreeSet<(PeerId, PeerId)>| {
                            b != a && !links.contains(&(a.min(b), a.max(b)))
                        };
                        if !valid(stubs[i + 1], &links) {
                            let Some(j) =
                                (i + 2..stubs.len()).find(|&j| valid(stubs[j], &links))
                            else {
                                continue 'attempt;
                            };
                            stubs.swap(i + 1, j);
                        }
                        let b = stubs[i + 1];
                        links.insert((a.min(b), a.max(b)));
                        i += 2;
                    }
                    let topo = Topology::from_links(peers, links);
                    if topo.is_connected() {
                        return Ok(topo);
                    }
                }
                Err(Error::Config(format!(
                    "could not generate a connected {degree}-regular overlay of {peers} peers"
                )))
            }
        }
    }

    fn from_links(peers: u32, links: BTreeSet<(PeerId, PeerId)>) -> Topology {
        let mut adjacency = vec![Vec::new(); peers as usize];
        for &(a, b) in &links {
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Topology {
            peer_count: peers,
            links,
            adjacency,
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.peer_count == 0 {
            return true;
        }
        let mut seen = vec![false; self.peer_count as usize];
        let mut stack = vec![0_u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(p) = stack.pop() {
            for &n in self.neighbors(p) {
                if !seen[n as usize] {
                    seen[n as usize] = true;
                    count += 1;
                    stack.push(n);
                }
            }
        }
        count == self.peer_count
    }
}

/// Assignment of every data edge to its replica peers.
#[derive(Debug, Clone)]
pub struct Placement {
    /// Replica peers per edge, parallel to the network edge list.
    assignment: Vec<Vec<PeerId>>,
    /// Requested replication rate k.
    rate: f64,
    /// Replication factor: replicas per edge, `round(k * N_p)`.
    factor: u32,
    seed: u64,
}

impl Placement {
    pub fn factor(&self) -> u32 {
        self.factor
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicas(&self, edge: usize) -> &[PeerId] {
        &self.assignment[edge]
    }
}

/// One broadcast-queries-the-network operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BroadcastQuery {
    /// All edges whose forward label is in the set.
    ByLabels(BTreeSet<String>),
    /// Extended edges adjacent to the node, restricted to the label set.
    Neighbors(NodeId, LabelSet),
    /// Who is there? Every peer acknowledges.
    Ping,
    /// Every peer reports its number of overlay links.
    DegreeCount,
    /// Which peers hold this exact edge?
    ResourceProbe(NodeId, String, NodeId),
    /// Every peer reports how many distinct edges it stores.
    EdgeCount,
}

impl BroadcastQuery {
    /// Message payload size in symbols.
    pub fn size_symbols(&self) -> u64 {
        match self {
            BroadcastQuery::ByLabels(labels) => labels.len() as u64,
            BroadcastQuery::Neighbors(_, wanted) => 1 + wanted.symbol_len(),
            BroadcastQuery::Ping | BroadcastQuery::DegreeCount | BroadcastQuery::EdgeCount => 1,
            BroadcastQuery::ResourceProbe(..) => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponsePayload {
    Edges(Vec<ExtEdge>),
    Count(u64),
    Ack,
}

impl ResponsePayload {
    pub fn size_symbols(&self) -> u64 {
        match self {
            ResponsePayload::Edges(edges) => 3 * edges.len() as u64,
            ResponsePayload::Count(_) | ResponsePayload::Ack => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeerResponse {
    pub peer: PeerId,
    pub payload: ResponsePayload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BroadcastOutcome {
    pub messages: u64,
    pub responses: Vec<PeerResponse>,
}

/// One ledger line: the exact message and symbol counts of one phase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LedgerRow {
    pub phase: String,
    pub broadcast_symbols: u64,
    pub unicast_symbols: u64,
    pub broadcast_msgs: u64,
    pub unicast_msgs: u64,
}

/// Append-only message-cost ledger; totals only ever grow.
#[derive(Debug, Clone, Default)]
pub struct Ledger {
    rows: Vec<LedgerRow>,
}

impl Ledger {
    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    pub fn totals(&self) -> LedgerRow {
        let mut total = LedgerRow {
            phase: "total".to_string(),
            ..Default::default()
        };
        for row in &self.rows {
            total.broadcast_symbols += row.broadcast_symbols;
            total.unicast_symbols += row.unicast_symbols;
            total.broadcast_msgs += row.broadcast_msgs;
            total.unicast_msgs += row.unicast_msgs;
        }
        total
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("phase,broadcast_symbols,unicast_symbols,broadcast_msgs,unicast_msgs\n");
        for row in self.rows.iter().chain(std::iter::once(&self.totals())) {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.phase,
                row.broadcast_symbols,
                row.unicast_symbols,
                row.broadcast_msgs,
                row.unicast_msgs
            ));
        }
        out
    }
}

/// Parameter estimates obtained from probe broadcasts.
#[derive(Debug, Clone)]
pub struct NetworkEstimate {
    pub n_p: u64,
    pub n_c: u64,
    pub k: BigRational,
    pub d: BigRational,
}

#[derive(Debug, Clone, Copy)]
struct StoredEdge {
    src: NodeId,
    label: u32,
    dst: NodeId,
}

/// The simulated network: topology, per-peer data stores, and the ledger.
#[derive(Debug, Clone)]
pub struct PeerNetwork {
    topology: Topology,
    placement: Placement,
    edges: Vec<StoredEdge>,
    labels: Vec<String>,
    universe: Vec<NodeId>,
    peer_edges: Vec<Vec<usize>>,
    peer_out: Vec<HashMap<NodeId, Vec<usize>>>,
    peer_in: Vec<HashMap<NodeId, Vec<usize>>>,
    attached: PeerId,
    ledger: Ledger,
}

/// Distribute a graph over a generated overlay. Every edge is stored by
/// `round(k * peers)` distinct peers chosen uniformly; `k * peers` must
/// round to at least one replica.
pub fn build_network(
    graph: &LabeledGraph,
    peers: u32,
    topology: TopologyKind,
    k: f64,
    seed: u64,
) -> Result<PeerNetwork> {
    if peers < 2 {
        return Err(Error::Config(format!("need at least 2 peers, got {peers}")));
    }
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::Config(format!(
            "replication rate {k} outside (0, 1]"
        )));
    }
    let factor = (k * peers as f64).round() as i64;
    if factor < 1 {
        return Err(Error::Config(format!(
            "replication rate {k} over {peers} peers yields no replicas (k*N_p = {:.3})",
            k * peers as f64
        )));
    }
    let factor = factor as u32;
    let topology = Topology::generate(topology, peers, seed)?;

    let edges: Vec<StoredEdge> = graph
        .edge_triples()
        .map(|(src, label, dst)| StoredEdge { src, label, dst })
        .collect();
    let mut rng = derive_rng(seed, 1);
    let assignment: Vec<Vec<PeerId>> = edges
        .iter()
        .map(|_| {
            let mut chosen: Vec<PeerId> = index_sample(&mut rng, peers as usize, factor as usize)
                .iter()
                .map(|i| i as PeerId)
                .collect();
            chosen.sort_unstable();
            chosen
        })
        .collect();

    let mut peer_edges = vec![Vec::new(); peers as usize];
    let mut peer_out: Vec<HashMap<NodeId, Vec<usize>>> = vec![HashMap::new(); peers as usize];
    let mut peer_in: Vec<HashMap<NodeId, Vec<usize>>> = vec![HashMap::new(); peers as usize];
    for (idx, (edge, holders)) in edges.iter().zip(&assignment).enumerate() {
        for &p in holders {
            peer_edges[p as usize].push(idx);
            peer_out[p as usize].entry(edge.src).or_default().push(idx);
            peer_in[p as usize].entry(edge.dst).or_default().push(idx);
        }
    }

    Ok(PeerNetwork {
        topology,
        placement: Placement {
            assignment,
            rate: k,
            factor,
            seed,
        },
        edges,
        labels: graph.label_names().to_vec(),
        universe: graph.node_ids().collect(),
        peer_edges,
        peer_out,
        peer_in,
        attached: 0,
        ledger: Ledger::default(),
    })
}

impl PeerNetwork {
    pub fn peer_count(&self) -> u32 {
        self.topology.peer_count()
    }

    pub fn link_count(&self) -> u64 {
        self.topology.link_count()
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Forward label universe of the stored data.
    pub fn all_labels(&self) -> Vec<String> {
        self.labels.clone()
    }

    /// Node universe of the stored data.
    pub fn node_universe(&self) -> &[NodeId] {
        &self.universe
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn attached_peer(&self) -> PeerId {
        self.attached
    }

    pub fn attach_to(&mut self, peer: PeerId) {
        assert!(peer < self.peer_count());
        self.attached = peer;
    }

    /// Messages one flood costs on this overlay: every peer except the
    /// origin forwards once to all neighbors but the sender.
    pub fn flood_message_count(&self) -> u64 {
        2 * self.link_count() - u64::from(self.peer_count()) + 1
    }

    /// Flood `query` from the attached peer, collect all unicast responses,
    /// and charge the ledger under `phase`.
    pub fn broadcast(&mut self, query: &BroadcastQuery, phase: &str) -> BroadcastOutcome {
        let messages = self.flood(self.attached);
        debug_assert_eq!(messages, self.flood_message_count());

        let mut responses = Vec::new();
        let mut response_symbols = 0;
        for peer in 0..self.peer_count() {
            if let Some(payload) = self.respond(peer, query) {
                response_symbols += payload.size_symbols();
                responses.push(PeerResponse { peer, payload });
            }
        }

        self.ledger.rows.push(LedgerRow {
            phase: phase.to_string(),
            broadcast_symbols: query.size_symbols() * messages,
            unicast_symbols: response_symbols,
            broadcast_msgs: messages,
            unicast_msgs: responses.len() as u64,
        });

        BroadcastOutcome {
            messages,
            responses,
        }
    }

    /// Simulate the flood and count link transmissions. Every peer receives
    /// the message; only the first receipt is forwarded.
    fn flood(&self, origin: PeerId) -> u64 {
        let mut received = vec![false; self.peer_count() as usize];
        received[origin as usize] = true;
        let mut queue: VecDeque<(PeerId, PeerId)> = self
            .topology
            .neighbors(origin)
            .iter()
            .map(|&n| (origin, n))
            .collect();
        let mut messages = 0;
        while let Some((sender, target)) = queue.pop_front() {
            messages += 1;
            if !received[target as usize] {
                received[target as usize] = true;
                for &n in self.topology.neighbors(target) {
                    if n != sender {
                        queue.push_back((target, n));
                    }
                }
            }
        }
        debug_assert!(received.iter().all(|&r| r));
        messages
    }

    fn respond(&self, peer: PeerId, query: &BroadcastQuery) -> Option<ResponsePayload> {
        let p = peer as usize;
        match query {
            BroadcastQuery::Ping => Some(ResponsePayload::Ack),
            BroadcastQuery::DegreeCount => Some(ResponsePayload::Count(
                self.topology.neighbors(peer).len() as u64,
            )),
            BroadcastQuery::EdgeCount => {
                Some(ResponsePayload::Count(self.peer_edges[p].len() as u64))
            }
            BroadcastQuery::ByLabels(labels) => {
                let edges: Vec<ExtEdge> = self.peer_edges[p]
                    .iter()
                    .filter(|&&e| labels.contains(&self.labels[self.edges[e].label as usize]))
                    .map(|&e| self.forward_edge(e))
                    .collect();
                (!edges.is_empty()).then_some(ResponsePayload::Edges(edges))
            }
            BroadcastQuery::Neighbors(v, wanted) => {
                let mut edges: Vec<ExtEdge> = Vec::new();
                if let Some(out) = self.peer_out[p].get(v) {
                    for &e in out {
                        let label =
                            Label::forward(self.labels[self.edges[e].label as usize].clone());
                        if wanted.matches(&label) {
                            edges.push((*v, label, self.edges[e].dst));
                        }
                    }
                }
                if let Some(inn) = self.peer_in[p].get(v) {
                    for &e in inn {
                        let label =
                            Label::inverse(self.labels[self.edges[e].label as usize].clone());
                        if wanted.matches(&label) {
                            edges.push((*v, label, self.edges[e].src));
                        }
                    }
                }
                edges.sort();
                (!edges.is_empty()).then_some(ResponsePayload::Edges(edges))
            }
            BroadcastQuery::ResourceProbe(src, label, dst) => {
                let held = self.peer_edges[p].iter().any(|&e| {
                    self.edges[e].src == *src
                        && self.edges[e].dst == *dst
                        && self.labels[self.edges[e].label as usize] == *label
                });
                held.then(|| {
                    ResponsePayload::Edges(vec![(*src, Label::forward(label.clone()), *dst)])
                })
            }
        }
    }

    fn forward_edge(&self, e: usize) -> ExtEdge {
        let edge = &self.edges[e];
        (
            edge.src,
            Label::forward(self.labels[edge.label as usize].clone()),
            edge.dst,
        )
    }

    /// Estimate network and distribution parameters with probe broadcasts:
    /// a ping for the peer count, a degree report for the link count, and
    /// `probe_sample` random resource probes for the replication rate. All
    /// probes are charged to the ledger.
    pub fn estimate_network_params(
        &mut self,
        probe_sample: usize,
        seed: u64,
    ) -> Result<NetworkEstimate> {
        if probe_sample < 1 || probe_sample > self.edges.len() {
            return Err(Error::Config(format!(
                "probe sample {probe_sample} outside 1..={}",
                self.edges.len()
            )));
        }
        let ping = self.broadcast(&BroadcastQuery::Ping, "probe:ping");
        let n_p = ping.responses.len() as u64;

        let degrees = self.broadcast(&BroadcastQuery::DegreeCount, "probe:degree");
        let degree_sum: u64 = degrees
            .responses
            .iter()
            .map(|r| match r.payload {
                ResponsePayload::Count(c) => c,
                _ => 0,
            })
            .sum();
        let n_c = degree_sum / 2;

        let mut rng = derive_rng(seed, 2);
        let picks = index_sample(&mut rng, self.edges.len(), probe_sample);
        let mut replica_sum: u64 = 0;
        for e in picks.iter() {
            let edge = self.edges[e];
            let probe = BroadcastQuery::ResourceProbe(
                edge.src,
                self.labels[edge.label as usize].clone(),
                edge.dst,
            );
            let outcome = self.broadcast(&probe, "probe:resource");
            replica_sum += outcome.responses.len() as u64;
        }
        let k = BigRational::new(replica_sum.into(), (probe_sample as u64 * n_p).into());
        let d = BigRational::new(n_c.into(), n_p.into());

        Ok(NetworkEstimate { n_p, n_c, k, d })
    }

    /// Estimate the total number of distinct data edges from per-peer store
    /// sizes and an estimated replication factor `K = k * N_p`.
    pub fn estimate_total_edges(&mut self, replication_factor: &BigRational) -> BigRational {
        let outcome = self.broadcast(&BroadcastQuery::EdgeCount, "probe:edge_count");
        let stored_sum: u64 = outcome
            .responses
            .iter()
            .map(|r| match r.payload {
                ResponsePayload::Count(c) => c,
                _ => 0,
            })
            .sum();
        BigRational::from_integer(stored_sum.into()) / replication_factor
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_tsv;
    use num::ToPrimitive;

    fn fixture() -> LabeledGraph {
        parse_tsv(include_str!("../../../fixtures/fig1a.tsv"), "fig1a.tsv").unwrap()
    }

    fn fixture_net(peers: u32, k: f64, seed: u64) -> PeerNetwork {
        build_network(
            &fixture(),
            peers,
            TopologyKind::RandomRegular { degree: 3 },
            k,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn exact_replication_factor() {
        let net = fixture_net(10, 0.2, 7);
        assert_eq!(net.placement().factor(), 2);
        for e in 0..net.edge_count() {
            assert_eq!(net.placement().replicas(e).len(), 2);
        }
    }

    #[test]
    fn zero_replica_rate_is_rejected() {
        let err = build_network(&fixture(), 10, TopologyKind::Star, 0.04, 7).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn impossible_regular_degree_is_rejected() {
        let err =
            Topology::generate(TopologyKind::RandomRegular { degree: 10 }, 10, 7).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err =
            Topology::generate(TopologyKind::RandomRegular { degree: 3 }, 5, 7).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn regular_overlay_link_count() {
        let topo =
            Topology::generate(TopologyKind::RandomRegular { degree: 3 }, 150, 11).unwrap();
        assert_eq!(topo.link_count(), 225);
        assert!(topo.is_connected());
        assert_eq!(topo.avg_degree(), BigRational::new(225.into(), 150.into()));
    }

    #[test]
    fn star_ping_flood_trace() {
        let mut net = build_network(&fixture(), 5, TopologyKind::Star, 0.2, 7).unwrap();
        assert_eq!(net.link_count(), 4);
        let outcome = net.broadcast(&BroadcastQuery::Ping, "ping");
        // 2*4 - 5 + 1 = 4 messages, every peer acknowledges.
        assert_eq!(outcome.messages, 4);
        assert_eq!(outcome.responses.len(), 5);
        let row = &net.ledger().rows()[0];
        assert_eq!(row.broadcast_msgs, 4);
        assert_eq!(row.broadcast_symbols, 4);
        assert_eq!(row.unicast_msgs, 5);
        assert_eq!(row.unicast_symbols, 5);
    }

    #[test]
    fn flood_from_leaf_costs_the_same() {
        let mut net = build_network(&fixture(), 5, TopologyKind::Star, 0.2, 7).unwrap();
        net.attach_to(3);
        let outcome = net.broadcast(&BroadcastQuery::Ping, "ping");
        assert_eq!(outcome.messages, 4);
    }

    #[test]
    fn by_labels_returns_every_copy() {
        let mut net = fixture_net(10, 0.2, 7);
        let labels: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let outcome = net.broadcast(&BroadcastQuery::ByLabels(labels), "s1");
        let total_edges: usize = outcome
            .responses
            .iter()
            .map(|r| match &r.payload {
                ResponsePayload::Edges(e) => e.len(),
                _ => 0,
            })
            .sum();
        // 12 a/b edges, 2 replicas each.
        assert_eq!(total_edges, 24);
        let row = net.ledger().rows().last().unwrap();
        assert_eq!(row.unicast_symbols, 72);
    }

    #[test]
    fn unknown_node_still_charges_the_broadcast() {
        let mut net = fixture_net(10, 0.2, 7);
        let wanted = LabelSet::from_labels([Label::forward("a")]);
        let outcome = net.broadcast(&BroadcastQuery::Neighbors(NodeId(999), wanted), "s2");
        assert!(outcome.responses.is_empty());
        let row = net.ledger().rows().last().unwrap();
        assert!(row.broadcast_symbols > 0);
        assert_eq!(row.unicast_symbols, 0);
    }

    #[test]
    fn neighbors_query_serves_inverse_edges() {
        let g = fixture();
        let mut net = fixture_net(10, 0.2, 7);
        let v5 = g.node_id("5").unwrap();
        let wanted = LabelSet::from_labels([Label::inverse("b")]);
        let outcome = net.broadcast(&BroadcastQuery::Neighbors(v5, wanted), "s2");
        let mut seen = BTreeSet::new();
        for r in outcome.responses {
            if let ResponsePayload::Edges(edges) = r.payload {
                seen.extend(edges);
            }
        }
        let v4 = g.node_id("4").unwrap();
        assert_eq!(
            seen.into_iter().collect::<Vec<_>>(),
            vec![(v5, Label::inverse("b"), v4)]
        );
    }

    #[test]
    fn parameter_estimates_are_exact() {
        let mut net = fixture_net(10, 0.2, 7);
        let est = net.estimate_network_params(15, 3).unwrap();
        assert_eq!(est.n_p, 10);
        assert_eq!(est.n_c, 15);
        assert_eq!(est.k.to_f64().unwrap(), 0.2);
        assert_eq!(est.d, BigRational::new(15.into(), 10.into()));
        let k_np = est.k.clone() * BigRational::from_integer(10.into());
        let edges = net.estimate_total_edges(&k_np);
        assert_eq!(edges, BigRational::from_integer(15.into()));
    }

    #[test]
    fn probe_sample_bounds_checked() {
        let mut net = fixture_net(10, 0.2, 7);
        assert!(net.estimate_network_params(0, 3).is_err());
        assert!(net.estimate_network_params(16, 3).is_err());
    }

    #[test]
    fn flood_identity_on_random_overlays() {
        for seed in 0..10 {
            for (kind, peers) in [
                (TopologyKind::RandomRegular { degree: 4 }, 21),
                (TopologyKind::ErdosRenyi { edge_prob: 0.3 }, 17),
                (TopologyKind::Star, 9),
            ] {
                let mut net = build_network(&fixture(), peers, kind, 0.5, seed).unwrap();
                let n_c = net.link_count();
                let n_p = u64::from(net.peer_count());
                let outcome = net.broadcast(&BroadcastQuery::Ping, "ping");
                assert_eq!(outcome.messages, 2 * n_c - n_p + 1);
                assert!(outcome.messages >= n_c && outcome.messages <= 2 * n_c);
                assert_eq!(outcome.responses.len() as u64, n_p);
            }
        }
    }

    #[test]
    fn ledger_is_deterministic() {
        let run = |k, seed| {
            let mut net = fixture_net(10, k, seed);
            net.broadcast(&BroadcastQuery::Ping, "ping");
            net.estimate_network_params(5, 1).unwrap();
            net.ledger().to_csv()
        };
        assert_eq!(run(0.2, 42), run(0.2, 42));
        // More replicas per edge show up in the probe response symbols.
        assert_ne!(run(0.2, 42), run(0.3, 42));
    }
}
