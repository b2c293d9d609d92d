//! Statistical graph models for query cost estimation.
//!
//! Both models replace the data graph with a generator: the product search
//! runs unchanged, but neighbor lookups draw random edges instead of
//! reading storage. Degrees are drawn per (node, label) and memoized for
//! the rest of the run, so the virtual graph stays consistent under
//! re-visits. Broadcast and retrieval symbols are accounted exactly as the
//! bottom-up network strategy counts them.
//!
//! The label-binomial model draws the out-degree of every node from
//! `Binomial(V, p(label))` with `p` fitted from label frequencies; it
//! ignores all graph structure. The conditional (Bayesian-binomial) model
//! draws `Poisson` degrees whose rate depends on the label of the edge the
//! search arrived by, fitted from two-step label paths. Neither model
//! reproduces clustering: generated targets are uniform over the node
//! universe, so paths merge only by chance.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num::{BigRational, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Poisson};

use crate::cost::rational_from_u64;
use crate::engine::{eval_single_source, EdgeSource, EvalOptions};
use crate::error::{Error, Result};
use crate::graph::{ExtEdge, Label, LabelSet, LabeledGraph, LabelStats, NodeId};
use crate::query::{Query, QueryKind};
use crate::rng::derive_rng;

/// Label-binomial random graph: every possible edge `(u, label, v)` exists
/// independently with probability `p(label)`.
#[derive(Debug, Clone)]
pub struct GilbertModel {
    node_count: u64,
    probs: BTreeMap<String, BigRational>,
}

impl GilbertModel {
    pub fn node_count(&self) -> u64 {
        self.node_count
    }

    /// Exact fitted edge probability for a forward label; zero for labels
    /// absent from the sample.
    pub fn prob(&self, label: &str) -> BigRational {
        self.probs
            .get(label)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    fn prob_f64(&self, label: &str) -> f64 {
        self.probs
            .get(label)
            .and_then(|p| p.to_f64())
            .unwrap_or(0.0)
    }

    fn labels(&self) -> Vec<String> {
        self.probs.keys().cloned().collect()
    }
}

/// Fit the label-binomial model from a sample graph, scaled to a target
/// graph of `target_nodes` nodes and `target_edges` edges:
/// `p(a) = (count(a) / |E_sample|) * target_edges / target_nodes^2`.
pub fn fit_gilbert(
    sample: &LabeledGraph,
    target_nodes: u64,
    target_edges: u64,
) -> Result<GilbertModel> {
    let stats = sample.label_stats();
    if stats.edge_count == 0 {
        return Err(Error::Config(
            "cannot fit a model on an empty sample".into(),
        ));
    }
    if target_nodes < stats.node_count {
        return Err(Error::Config(format!(
            "target node count {target_nodes} below sample node count {}",
            stats.node_count
        )));
    }
    let nodes_sq = rational_from_u64(target_nodes) * rational_from_u64(target_nodes);
    let mut probs = BTreeMap::new();
    for (label, count) in &stats.counts {
        let p = rational_from_u64(*count) * rational_from_u64(target_edges)
            / (rational_from_u64(stats.edge_count) * nodes_sq.clone());
        if p > BigRational::from_integer(1.into()) {
            return Err(Error::Config(format!(
                "fitted probability for label `{label}` exceeds 1; target graph too dense"
            )));
        }
        probs.insert(label.clone(), p);
    }
    Ok(GilbertModel {
        node_count: target_nodes,
        probs,
    })
}

/// Conditional random graph: out-degrees are Poisson with rates keyed by
/// (arrival label, outgoing label). Labels are direction-aware so inverse
/// traversal can be sampled too.
#[derive(Debug, Clone)]
pub struct BayesModel {
    pub node_count: u64,
    /// Fraction of nodes with at least one outgoing extended edge of the
    /// label.
    pub start_valid_prob: BTreeMap<Label, f64>,
    /// Mean outgoing count of the label among nodes that have it at all.
    pub start_rate: BTreeMap<Label, f64>,
    /// Mean number of outgoing `b` edges from nodes with an incoming `a`
    /// edge, per extended label pair (a, b). Absent pairs mean zero.
    pub cond_rate: BTreeMap<(Label, Label), f64>,
}

impl BayesModel {
    fn labels(&self) -> Vec<String> {
        let mut names = BTreeSet::new();
        for label in self.start_rate.keys() {
            names.insert(label.name.clone());
        }
        for (a, b) in self.cond_rate.keys() {
            names.insert(a.name.clone());
            names.insert(b.name.clone());
        }
        names.into_iter().collect()
    }
}

/// Fit the conditional model from a sample graph. The virtual node count
/// defaults to the sample's.
pub fn fit_bayes(sample: &LabeledGraph, node_count: Option<u64>) -> Result<BayesModel> {
    if sample.edge_count() == 0 {
        return Err(Error::Config(
            "cannot fit a model on an empty sample".into(),
        ));
    }
    let n = sample.node_count();
    // Extended out/in label counts per node: a forward edge (u, l, v)
    // contributes l at u (out) and at v (in), plus the mirrored l^-1 at v
    // (out) and at u (in).
    let mut out_counts: Vec<BTreeMap<Label, u64>> = vec![BTreeMap::new(); n];
    let mut in_counts: Vec<BTreeMap<Label, u64>> = vec![BTreeMap::new(); n];
    let mut label_totals: BTreeMap<Label, u64> = BTreeMap::new();
    for (src, name, dst) in sample.edges() {
        let fwd = Label::forward(name);
        let inv = Label::inverse(name);
        *out_counts[src.index()].entry(fwd.clone()).or_insert(0) += 1;
        *in_counts[dst.index()].entry(fwd.clone()).or_insert(0) += 1;
        *out_counts[dst.index()].entry(inv.clone()).or_insert(0) += 1;
        *in_counts[src.index()].entry(inv.clone()).or_insert(0) += 1;
        *label_totals.entry(fwd).or_insert(0) += 1;
        *label_totals.entry(inv).or_insert(0) += 1;
    }

    let mut start_valid_prob = BTreeMap::new();
    let mut start_rate = BTreeMap::new();
    for label in label_totals.keys() {
        let holders: Vec<u64> = (0..n)
            .filter_map(|v| out_counts[v].get(label).copied())
            .collect();
        if holders.is_empty() {
            continue;
        }
        let total: u64 = holders.iter().sum();
        start_valid_prob.insert(label.clone(), holders.len() as f64 / n as f64);
        start_rate.insert(label.clone(), total as f64 / holders.len() as f64);
    }

    let mut cond_rate = BTreeMap::new();
    for (a, a_total) in &label_totals {
        for b in label_totals.keys() {
            let two_paths: u64 = (0..n)
                .map(|v| {
                    in_counts[v].get(a).copied().unwrap_or(0)
                        * out_counts[v].get(b).copied().unwrap_or(0)
                })
                .sum();
            if two_paths > 0 {
                cond_rate.insert((a.clone(), b.clone()), two_paths as f64 / *a_total as f64);
            }
        }
    }

    Ok(BayesModel {
        node_count: node_count.unwrap_or(n as u64),
        start_valid_prob,
        start_rate,
        cond_rate,
    })
}

/// Degree generator backing a virtual edge source.
pub trait GenerativeModel {
    fn node_count(&self) -> u64;

    /// Forward label names the model knows about, for wildcard expansion.
    fn known_labels(&self) -> Vec<String>;

    /// Draw the number of `label` edges leaving a node, given the label the
    /// search arrived by (`None` at the start node).
    fn sample_degree(&self, rng: &mut ChaCha8Rng, label: &Label, arrival: Option<&Label>) -> u64;
}

impl GenerativeModel for GilbertModel {
    fn node_count(&self) -> u64 {
        self.node_count
    }

    fn known_labels(&self) -> Vec<String> {
        self.labels()
    }

    fn sample_degree(&self, rng: &mut ChaCha8Rng, label: &Label, _arrival: Option<&Label>) -> u64 {
        // Out- and in-degrees are both Binomial(V, p(base label)).
        let p = self.prob_f64(&label.name);
        if p <= 0.0 {
            return 0;
        }
        let dist = Binomial::new(self.node_count, p).expect("fitted probability is in [0,1]");
        rng.sample(dist)
    }
}

impl GenerativeModel for BayesModel {
    fn node_count(&self) -> u64 {
        self.node_count
    }

    fn known_labels(&self) -> Vec<String> {
        self.labels()
    }

    fn sample_degree(&self, rng: &mut ChaCha8Rng, label: &Label, arrival: Option<&Label>) -> u64 {
        let rate = match arrival {
            None => {
                let valid = self.start_valid_prob.get(label).copied().unwrap_or(0.0);
                if valid <= 0.0 || !rng.random_bool(valid.min(1.0)) {
                    return 0;
                }
                self.start_rate.get(label).copied().unwrap_or(0.0)
            }
            Some(a) => self
                .cond_rate
                .get(&(a.clone(), label.clone()))
                .copied()
                .unwrap_or(0.0),
        };
        if rate <= 0.0 {
            return 0;
        }
        let sampled = rng.sample(Poisson::new(rate).expect("positive rate"));
        (sampled as u64).min(self.node_count)
    }
}

/// Edge source that generates adjacency on demand from a model. Nodes are
/// the integers `0..V`; the start node is 0 and keeps start semantics even
/// if a generated cycle returns to it. Only single-source evaluation is
/// meaningful here.
struct VirtualSource<'m, M: GenerativeModel> {
    model: &'m M,
    rng: ChaCha8Rng,
    start: NodeId,
    memo: HashMap<(NodeId, Label), Vec<NodeId>>,
    arrival: HashMap<NodeId, Label>,
    requests: HashSet<(NodeId, LabelSet)>,
    q_bc: u64,
    retrieved: BTreeSet<ExtEdge>,
}

impl<'m, M: GenerativeModel> VirtualSource<'m, M> {
    fn new(model: &'m M, rng: ChaCha8Rng, start: NodeId) -> Self {
        VirtualSource {
            model,
            rng,
            start,
            memo: HashMap::new(),
            arrival: HashMap::new(),
            requests: HashSet::new(),
            q_bc: 0,
            retrieved: BTreeSet::new(),
        }
    }

    fn targets_for(&mut self, v: NodeId, label: &Label) -> Vec<NodeId> {
        if let Some(memoized) = self.memo.get(&(v, label.clone())) {
            return memoized.clone();
        }
        let arrival = if v == self.start {
            None
        } else {
            self.arrival.get(&v).cloned()
        };
        let degree = self
            .model
            .sample_degree(&mut self.rng, label, arrival.as_ref())
            .min(self.model.node_count());
        let universe = self.model.node_count() as usize;
        let mut targets: Vec<NodeId> =
            rand::seq::index::sample(&mut self.rng, universe, degree as usize)
                .iter()
                .map(|i| NodeId(i as u32))
                .collect();
        targets.sort_unstable();
        for &w in &targets {
            if w != self.start {
                // First arrival wins: matches the breadth-first order in
                // which the search discovers nodes.
                self.arrival.entry(w).or_insert_with(|| label.clone());
            }
            self.retrieved.insert((v, label.clone(), w));
        }
        self.memo.insert((v, label.clone()), targets.clone());
        targets
    }
}

impl<M: GenerativeModel> EdgeSource for VirtualSource<'_, M> {
    fn neighbors(&mut self, v: NodeId, wanted: &LabelSet) -> Vec<(Label, NodeId)> {
        if self.requests.insert((v, wanted.clone())) {
            self.q_bc += 1 + wanted.symbol_len();
        }
        let mut labels: BTreeSet<Label> = wanted.iter_named().cloned().collect();
        if wanted.any_forward() {
            for name in self.model.known_labels() {
                labels.insert(Label::forward(name));
            }
        }
        let mut result = Vec::new();
        for label in labels {
            for w in self.targets_for(v, &label) {
                result.push((label.clone(), w));
            }
        }
        result
    }

    fn all_nodes(&mut self) -> Vec<NodeId> {
        Vec::new()
    }
}

/// One simulated run: the cost factors a bottom-up execution of the query
/// would have incurred on the generated graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostSample {
    pub q_bc: u64,
    pub d_s2: u64,
    pub edges_traversed: u64,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostField {
    QBc,
    DS2,
    Edges,
}

impl CostField {
    pub fn of(&self, sample: &CostSample) -> u64 {
        match self {
            CostField::QBc => sample.q_bc,
            CostField::DS2 => sample.d_s2,
            CostField::Edges => sample.edges_traversed,
        }
    }
}

/// Empirical distribution of Monte-Carlo cost samples.
#[derive(Debug, Clone)]
pub struct CostDistribution {
    pub samples: Vec<CostSample>,
    pub run_count: u64,
    pub seed: u64,
}

impl CostDistribution {
    fn field_values(&self, field: CostField, nonzero_only: bool) -> Vec<u64> {
        let mut values: Vec<u64> = self
            .samples
            .iter()
            .map(|s| field.of(s))
            .filter(|&v| !nonzero_only || v > 0)
            .collect();
        values.sort_unstable();
        values
    }

    /// Exact empirical complementary CDF: for every distinct sample value
    /// `t`, in ascending order, the fraction of samples strictly above `t`.
    pub fn ccdf(&self, field: CostField, nonzero_only: bool) -> Vec<(u64, f64)> {
        let values = self.field_values(field, nonzero_only);
        let n = values.len();
        let mut out = Vec::new();
        let mut idx = 0;
        while idx < n {
            let v = values[idx];
            let mut end = idx;
            while end < n && values[end] == v {
                end += 1;
            }
            out.push((v, (n - end) as f64 / n as f64));
            idx = end;
        }
        out
    }

    pub fn ccdf_csv(&self, field: CostField, nonzero_only: bool) -> String {
        let mut out = String::from("threshold,ccdf\n");
        for (threshold, fraction) in self.ccdf(field, nonzero_only) {
            out.push_str(&format!("{threshold},{fraction}\n"));
        }
        out
    }

    /// Fraction of samples above `threshold`, on the same conditioning.
    pub fn ccdf_at(&self, field: CostField, threshold: u64, nonzero_only: bool) -> f64 {
        let values = self.field_values(field, nonzero_only);
        if values.is_empty() {
            return 0.0;
        }
        let above = values.iter().filter(|&&v| v > threshold).count();
        above as f64 / values.len() as f64
    }

    /// Smallest value with empirical CDF at least `p`.
    pub fn quantile(&self, field: CostField, p: f64, nonzero_only: bool) -> Option<u64> {
        let values = self.field_values(field, nonzero_only);
        if values.is_empty() {
            return None;
        }
        let rank = (p * values.len() as f64).ceil() as usize;
        Some(values[rank.clamp(1, values.len()) - 1])
    }

    pub fn zero_fraction(&self, field: CostField) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let zeros = self.samples.iter().filter(|s| field.of(s) == 0).count();
        zeros as f64 / self.samples.len() as f64
    }

    pub fn truncated_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let t = self.samples.iter().filter(|s| s.truncated).count();
        t as f64 / self.samples.len() as f64
    }

    pub fn mean(&self, field: CostField, nonzero_only: bool) -> Option<f64> {
        let values = self.field_values(field, nonzero_only);
        if values.is_empty() {
            return None;
        }
        Some(values.iter().sum::<u64>() as f64 / values.len() as f64)
    }
}

/// Run the query once against a virtual graph drawn from the model.
/// The query's own kind is ignored: sampling is always single-source from
/// virtual node 0. The search stops (flagged, not failed) once `budget`
/// product states have been visited, since generated graphs can be
/// supercritical.
pub fn sample_cost<M: GenerativeModel>(
    model: &M,
    query: &Query,
    seed: u64,
    budget: u64,
) -> CostSample {
    sample_cost_stream(model, query, seed, 0, budget)
}

/// As [`sample_cost`], drawing from substream `stream` of `seed`; Monte
/// Carlo run `i` uses stream `i`.
pub fn sample_cost_stream<M: GenerativeModel>(
    model: &M,
    query: &Query,
    seed: u64,
    stream: u64,
    budget: u64,
) -> CostSample {
    assert!(budget > 0, "budget must be positive");
    let start = NodeId(0);
    let mut local = query.clone();
    local.kind = QueryKind::SingleSource(start);
    let mut source = VirtualSource::new(model, derive_rng(seed, stream), start);
    let opts = EvalOptions {
        max_states: Some(budget),
        ..Default::default()
    };
    let result = eval_single_source(&mut source, &local, &opts);
    CostSample {
        q_bc: source.q_bc,
        d_s2: 3 * source.retrieved.len() as u64,
        edges_traversed: source.retrieved.len() as u64,
        truncated: result.truncated,
    }
}

/// `runs` independent cost samples with per-run derived seeds;
/// deterministic for a fixed seed.
pub fn monte_carlo<M: GenerativeModel>(
    model: &M,
    query: &Query,
    runs: u64,
    seed: u64,
    budget: u64,
) -> Result<CostDistribution> {
    if runs < 1 {
        return Err(Error::Config("need at least one run".into()));
    }
    let samples = (0..runs)
        .map(|i| sample_cost_stream(model, query, seed, i, budget))
        .collect();
    Ok(CostDistribution {
        samples,
        run_count: runs,
        seed,
    })
}

/// Estimate the s1 download volume from sample label frequencies:
/// `3 * target_edges * (matching sample edges / sample edges)`, rounded to
/// the nearest symbol.
pub fn estimate_ds1(query: &Query, stats: &LabelStats, target_edges: u64) -> Result<u64> {
    if stats.edge_count == 0 {
        return Err(Error::Config("cannot estimate from an empty sample".into()));
    }
    let matching: u64 = query.distinct_labels.iter().map(|l| stats.count(l)).sum();
    let exact = rational_from_u64(3) * rational_from_u64(target_edges) * rational_from_u64(matching)
        / rational_from_u64(stats.edge_count);
    Ok(exact.round().to_integer().to_u64().unwrap_or(u64::MAX))
}
