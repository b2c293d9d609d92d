use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num::{BigRational, One, ToPrimitive};

use rpq_core::cost::{
    classify, cost_s1, cost_s2, discriminant, rational_from_u64, recommend, CostInputs,
    Discriminant, NetworkParams,
};
use rpq_core::engine::{eval_local, Answers, EvalOptions, QueryResult};
use rpq_core::error::{Error, Result};
use rpq_core::graph::{load_graph, LabeledGraph, NodeId};
use rpq_core::models::{fit_bayes, fit_gilbert, monte_carlo, estimate_ds1, CostDistribution, CostField};
use rpq_core::netsim::{build_network, PeerNetwork, TopologyKind};
use rpq_core::query::{ClassFile, Query, QueryKind};
use rpq_core::strategies::{run_s1, run_s2, CostRecord, Strategy};

use crate::{
    DecideArgs, EstimateArgs, ModelArg, NetArgs, NetstatsArgs, QueryArgs, SimulateArgs, StatsArgs,
    StrategyArg, TopologyArg,
};

/// Placeholder id for a start node missing from the graph; probing it
/// finds no edges.
const PROBE_NODE: NodeId = NodeId(u32::MAX);

fn load_classes(path: &Option<PathBuf>) -> Result<ClassFile> {
    match path {
        Some(p) => ClassFile::load(p),
        None => Ok(ClassFile::empty()),
    }
}

/// Build the query; a missing start node degrades to a probe id with a
/// warning, it is not an error.
fn build_query(
    graph: &LabeledGraph,
    expr: &str,
    start: &Option<String>,
    classes: &ClassFile,
) -> Result<(Query, Option<String>)> {
    match start {
        None => Ok((Query::parse(expr, classes, QueryKind::MultiSource)?, None)),
        Some(name) => match graph.node_id(name) {
            Some(id) => Ok((
                Query::parse(expr, classes, QueryKind::SingleSource(id))?,
                None,
            )),
            None => {
                eprintln!("warning: start node `{name}` not present in the graph");
                Ok((
                    Query::parse(expr, classes, QueryKind::SingleSource(PROBE_NODE))?,
                    Some(name.clone()),
                ))
            }
        },
    }
}

fn note_epsilon(query: &Query) {
    if !query.is_single_source() && query.accepts_epsilon() {
        eprintln!(
            "note: the expression accepts the empty word, so every node answers with itself"
        );
    }
}

fn render_node(graph: &LabeledGraph, id: NodeId, fallback: &Option<String>) -> String {
    graph
        .node_name(id)
        .map(str::to_string)
        .or_else(|| fallback.clone())
        .unwrap_or_else(|| format!("#{}", id.0))
}

fn answer_lines(
    graph: &LabeledGraph,
    result: &QueryResult,
    fallback: &Option<String>,
) -> Vec<String> {
    let mut lines: Vec<String> = match &result.answers {
        Answers::Nodes(nodes) => nodes
            .iter()
            .map(|&n| render_node(graph, n, fallback))
            .collect(),
        Answers::Pairs(pairs) => pairs
            .iter()
            .map(|&(a, b)| {
                format!(
                    "{}\t{}",
                    render_node(graph, a, fallback),
                    render_node(graph, b, fallback)
                )
            })
            .collect(),
    };
    lines.sort();
    lines
}

fn to_file_body(lines: &[String]) -> String {
    let mut body = String::new();
    for line in lines {
        body.push_str(line);
        body.push('\n');
    }
    body
}

fn write_output(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Exact rational, printed as an integer when possible.
fn plain_rational(v: &BigRational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        v.to_string()
    }
}

/// Parse a non-negative decimal like "3" or "0.25" into an exact rational.
fn parse_decimal(text: &str, what: &str) -> Result<BigRational> {
    let bad = || Error::Config(format!("{what} `{text}` is not a non-negative decimal"));
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let numer: num::BigInt = digits.parse().map_err(|_| bad())?;
    let denom = num::BigInt::from(10u32).pow(frac.len() as u32);
    Ok(BigRational::new(numer, denom))
}

pub fn query(args: QueryArgs) -> Result<()> {
    let graph = load_graph(&args.graph)?;
    let classes = load_classes(&args.classes)?;
    let (query, fallback) = build_query(&graph, &args.expr, &args.start, &classes)?;
    note_epsilon(&query);

    let result = eval_local(&graph, &query, &EvalOptions::default());
    let lines = answer_lines(&graph, &result, &fallback);
    for line in &lines {
        println!("{line}");
    }
    let stats = format!(
        "answers={} visited_states={} traversed_edges={}",
        result.answers.len(),
        result.visited_states,
        result.traversed_edges.len()
    );
    eprintln!("stats: {stats}");

    if let Some(dir) = &args.output_dir {
        write_output(dir, "answers.txt", &to_file_body(&lines))?;
        write_output(dir, "stats.txt", &format!("{stats}\n"))?;
    }
    Ok(())
}

fn topology_kind(net: &NetArgs) -> Result<TopologyKind> {
    match net.topology {
        TopologyArg::Star => {
            if net.degree.is_some() || net.edge_prob.is_some() {
                return Err(Error::Config(
                    "star topology takes neither --degree nor --edge-prob".into(),
                ));
            }
            Ok(TopologyKind::Star)
        }
        TopologyArg::RandomRegular => {
            if net.edge_prob.is_some() {
                return Err(Error::Config(
                    "--edge-prob applies to the erdos-renyi topology only".into(),
                ));
            }
            let degree = net.degree.ok_or(Error::Config(
                "the random-regular topology requires --degree".into(),
            ))?;
            Ok(TopologyKind::RandomRegular { degree })
        }
        TopologyArg::ErdosRenyi => {
            if net.degree.is_some() {
                return Err(Error::Config(
                    "--degree applies to the random-regular topology only".into(),
                ));
            }
            let edge_prob = net.edge_prob.ok_or(Error::Config(
                "the erdos-renyi topology requires --edge-prob".into(),
            ))?;
            Ok(TopologyKind::ErdosRenyi { edge_prob })
        }
    }
}

fn build_net(graph: &LabeledGraph, net: &NetArgs) -> Result<PeerNetwork> {
    build_network(
        graph,
        net.peers,
        topology_kind(net)?,
        net.replication,
        net.seed,
    )
}

fn network_params(net: &PeerNetwork) -> NetworkParams {
    let n_p = u64::from(net.peer_count());
    NetworkParams::new(
        n_p,
        BigRational::new(net.link_count().into(), n_p.into()),
        BigRational::new(
            u64::from(net.placement().factor()).into(),
            n_p.into(),
        ),
    )
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let graph = load_graph(&args.graph)?;
    let classes = load_classes(&args.classes)?;
    let (query, fallback) = build_query(&graph, &args.expr, &args.start, &classes)?;
    note_epsilon(&query);

    let strategy = if args.compare {
        StrategyArg::Both
    } else {
        args.strategy.ok_or(Error::Config(
            "pass --strategy s1|s2|both or --compare".into(),
        ))?
    };
    if args.budget.is_some() && strategy != StrategyArg::S2 {
        return Err(Error::Config(
            "--budget applies to the bottom-up strategy only".into(),
        ));
    }

    let mut net = build_net(&graph, &args.net)?;
    let mut out = String::new();
    writeln!(out, "{}", CostRecord::csv_header()).unwrap();

    let mut records: Vec<CostRecord> = Vec::new();
    let mut answer_files: Vec<(String, String)> = Vec::new();
    let run_one = |net: &mut PeerNetwork, which: Strategy| -> Result<(QueryResult, CostRecord)> {
        match which {
            Strategy::S1 => run_s1(net, &query, args.allow_full_retrieval, &EvalOptions::default()),
            Strategy::S2 => {
                let opts = EvalOptions {
                    max_edges: args.budget,
                    ..Default::default()
                };
                Ok(run_s2(net, &query, &opts))
            }
        }
    };
    let chosen: Vec<Strategy> = match strategy {
        StrategyArg::S1 => vec![Strategy::S1],
        StrategyArg::S2 => vec![Strategy::S2],
        StrategyArg::Both => vec![Strategy::S1, Strategy::S2],
    };
    for which in &chosen {
        let (result, record) = run_one(&mut net, *which)?;
        writeln!(out, "{}", record.to_csv_row()).unwrap();
        let lines = answer_lines(&graph, &result, &fallback);
        let name = if chosen.len() == 1 {
            "answers.txt".to_string()
        } else {
            format!("answers-{which}.txt")
        };
        answer_files.push((name, to_file_body(&lines)));
        records.push(record);
    }

    if let [r1, r2] = records.as_slice() {
        let inputs = CostInputs::from_records(r1, r2)
            .expect("both strategies ran, so all four factors are set");
        let params = network_params(&net);
        match classify(&params, &inputs) {
            Ok(winner) => writeln!(out, "verdict,{winner}").unwrap(),
            Err(err) => {
                eprintln!("warning: no verdict: {err}");
                writeln!(out, "verdict,unavailable").unwrap();
            }
        }
    }

    print!("{out}");
    if let Some(dir) = &args.output_dir {
        write_output(dir, "cost.csv", &out)?;
        write_output(dir, "ledger.csv", &net.ledger().to_csv())?;
        for (name, body) in &answer_files {
            write_output(dir, name, body)?;
        }
    }
    Ok(())
}

pub fn decide(args: DecideArgs) -> Result<()> {
    let d = match (&args.d, args.nc) {
        (Some(d), _) => parse_decimal(d, "degree")?,
        (None, Some(nc)) => BigRational::new(nc.into(), args.np.into()),
        (None, None) => {
            return Err(Error::Config("pass either --d or --nc".into()));
        }
    };
    let k = parse_decimal(&args.k, "replication rate")?;
    let params = NetworkParams::new(args.np, d, k);
    let low = CostInputs {
        q_lbl: args.q_lbl,
        d_s1: args.d_s1,
        q_bc: args.q_bc,
        d_s2: args.d_s2,
    };

    let s1 = cost_s1(&params, &low);
    let s2 = cost_s2(&params, &low);
    println!("cost_s1,{}", plain_rational(&s1));
    println!("cost_s2,{}", plain_rational(&s2));

    let k_over_d = &params.k / &params.d;
    let discr = discriminant(&low);
    match &discr {
        Discriminant::Value(v) => println!(
            "discriminant,{},{:.6}",
            plain_rational(v),
            v.to_f64().unwrap_or(f64::NAN)
        ),
        Discriminant::EqualData => println!("discriminant,equal-data"),
        Discriminant::S2Dominant => println!("discriminant,s2-dominant"),
    }
    println!(
        "k_over_d,{},{:.6}",
        plain_rational(&k_over_d),
        k_over_d.to_f64().unwrap_or(f64::NAN)
    );

    let region = match &discr {
        Discriminant::S2Dominant => "s2-always".to_string(),
        Discriminant::EqualData => "equal-data".to_string(),
        Discriminant::Value(v) => {
            if v > &BigRational::one() {
                "s1-always".to_string()
            } else if &k_over_d > v {
                "s2-region".to_string()
            } else {
                "s1-region".to_string()
            }
        }
    };
    println!("region,{region}");
    println!("winner,{}", classify(&params, &low)?);

    if let (Some(high_q_bc), Some(high_d_s2)) = (args.high_q_bc, args.high_d_s2) {
        let high = CostInputs {
            q_lbl: args.q_lbl,
            d_s1: args.d_s1,
            q_bc: high_q_bc,
            d_s2: high_d_s2,
        };
        let rec = recommend(&params, &low, &high, args.prob_low)?;
        println!("branch,probability,cost_s1,cost_s2,winner");
        for branch in &rec.branches {
            println!(
                "{},{},{},{},{}",
                branch.label,
                branch.probability,
                plain_rational(&branch.cost_s1),
                plain_rational(&branch.cost_s2),
                branch.winner
            );
        }
        println!("recommendation,{},{}", rec.winner, rec.confidence);
    }
    Ok(())
}

pub fn estimate(args: EstimateArgs) -> Result<()> {
    let sample = load_graph(&args.graph)?;
    let classes = load_classes(&args.classes)?;
    let query = Query::parse(&args.expr, &classes, QueryKind::MultiSource)?;
    let stats = sample.label_stats();
    let target_nodes = args.target_nodes.unwrap_or(stats.node_count);
    let target_edges = args.target_edges.unwrap_or(stats.edge_count);

    let dist: CostDistribution = match args.model {
        ModelArg::Gilbert => {
            let model = fit_gilbert(&sample, target_nodes, target_edges)?;
            monte_carlo(&model, &query, args.runs, args.seed, args.budget)?
        }
        ModelArg::Bayes => {
            let model = fit_bayes(&sample, args.target_nodes)?;
            monte_carlo(&model, &query, args.runs, args.seed, args.budget)?
        }
    };

    println!("runs,{}", dist.run_count);
    println!("zero_fraction,{}", dist.zero_fraction(CostField::Edges));
    println!("truncated_fraction,{}", dist.truncated_fraction());
    for (name, field) in [
        ("d_s2", CostField::DS2),
        ("q_bc", CostField::QBc),
        ("edges", CostField::Edges),
    ] {
        match dist.quantile(field, 0.9, args.nonzero_only) {
            Some(q) => println!("q90_{name},{q}"),
            None => println!("q90_{name},"),
        }
    }
    println!(
        "estimated_d_s1,{}",
        estimate_ds1(&query, &stats, target_edges)?
    );

    if let Some(dir) = &args.output_dir {
        for (name, field) in [
            ("ccdf_d_s2.csv", CostField::DS2),
            ("ccdf_q_bc.csv", CostField::QBc),
            ("ccdf_edges.csv", CostField::Edges),
        ] {
            write_output(dir, name, &dist.ccdf_csv(field, args.nonzero_only))?;
        }
    }
    Ok(())
}

pub fn netstats(args: NetstatsArgs) -> Result<()> {
    let graph = load_graph(&args.graph)?;
    let mut net = build_net(&graph, &args.net)?;
    let probe_sample = args
        .probe_sample
        .unwrap_or_else(|| net.edge_count().min(10));
    let est = net.estimate_network_params(probe_sample, args.probe_seed)?;
    println!("n_p,{}", est.n_p);
    println!("n_c,{}", est.n_c);
    println!(
        "k,{},{:.6}",
        plain_rational(&est.k),
        est.k.to_f64().unwrap_or(f64::NAN)
    );
    println!(
        "d,{},{:.6}",
        plain_rational(&est.d),
        est.d.to_f64().unwrap_or(f64::NAN)
    );
    let factor = est.k.clone() * rational_from_u64(est.n_p);
    let edges = net.estimate_total_edges(&factor);
    println!(
        "estimated_edges,{}",
        plain_rational(&edges.round())
    );
    if let Some(dir) = &args.output_dir {
        write_output(dir, "ledger.csv", &net.ledger().to_csv())?;
    }
    Ok(())
}

pub fn stats(args: StatsArgs) -> Result<()> {
    let graph = load_graph(&args.graph)?;
    let stats = graph.label_stats();
    println!("label,count");
    for (label, count) in &stats.counts {
        println!("{label},{count}");
    }
    println!("nodes,{}", stats.node_count);
    println!("edges,{}", stats.edge_count);
    Ok(())
}
