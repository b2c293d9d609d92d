//! `rpq`: evaluate regular path queries locally, simulate their execution
//! over a distributed peer network under the top-down (s1) or bottom-up
//! (s2) strategy, and estimate query costs before running anything.
//!
//! Exit codes: 0 success, 2 parse error (expressions, graph or class
//! files), 3 I/O error, 4 invalid configuration, 5 refused operation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rpq_core::ErrorClass;

mod commands;

#[derive(Parser)]
#[command(name = "rpq", version, about = "Regular path queries over distributed graph data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a query against a local graph file.
    Query(QueryArgs),
    /// Run a query over a simulated peer network and report message costs.
    Simulate(SimulateArgs),
    /// Compare the analytic strategy costs and recommend one.
    Decide(DecideArgs),
    /// Monte-Carlo cost estimation from a statistical graph model.
    Estimate(EstimateArgs),
    /// Probe a simulated network for its parameters.
    Netstats(NetstatsArgs),
    /// Label statistics of a graph file.
    Stats(StatsArgs),
}

#[derive(Args)]
struct QueryArgs {
    /// Graph TSV file (src<TAB>label<TAB>dst per line).
    #[arg(short, long)]
    graph: PathBuf,
    /// Path expression, e.g. "a* b b".
    #[arg(short, long)]
    expr: String,
    /// Start node for a single-source query; omit for multi-source.
    #[arg(short, long)]
    start: Option<String>,
    /// Label class file with NAME = alt1|alt2|... lines.
    #[arg(long)]
    classes: Option<PathBuf>,
    /// Also write answers.txt and stats.txt here.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TopologyArg {
    Star,
    RandomRegular,
    ErdosRenyi,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    S1,
    S2,
    Both,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Gilbert,
    Bayes,
}

#[derive(Args)]
struct NetArgs {
    /// Number of peers.
    #[arg(long)]
    peers: u32,
    /// Overlay topology.
    #[arg(long, value_enum, default_value = "star")]
    topology: TopologyArg,
    /// Per-peer link count for the random-regular topology.
    #[arg(long)]
    degree: Option<u32>,
    /// Link probability for the erdos-renyi topology.
    #[arg(long)]
    edge_prob: Option<f64>,
    /// Replication rate k in (0, 1]; every edge lands on round(k*peers)
    /// peers.
    #[arg(long)]
    replication: f64,
    /// Seed for topology and placement.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(short, long)]
    graph: PathBuf,
    #[arg(short, long)]
    expr: String,
    #[arg(short, long)]
    start: Option<String>,
    #[arg(long)]
    classes: Option<PathBuf>,
    #[command(flatten)]
    net: NetArgs,
    /// Strategy to execute.
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Run both strategies on the identical placement and append the
    /// analytic verdict.
    #[arg(long)]
    compare: bool,
    /// Edge cap for the bottom-up strategy; truncates answers when hit.
    #[arg(long)]
    budget: Option<u64>,
    /// Let the top-down strategy retrieve the full graph for wildcard
    /// queries instead of refusing.
    #[arg(long)]
    allow_full_retrieval: bool,
    /// Directory for cost.csv, ledger.csv and answer files.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct DecideArgs {
    /// Network size N_p.
    #[arg(long)]
    np: u64,
    /// Average degree d = N_c/N_p (decimal).
    #[arg(long, conflicts_with = "nc")]
    d: Option<String>,
    /// Link count N_c, an alternative way to give the degree.
    #[arg(long)]
    nc: Option<u64>,
    /// Replication rate k (decimal).
    #[arg(long)]
    k: String,
    #[arg(long)]
    q_lbl: u64,
    #[arg(long)]
    d_s1: u64,
    #[arg(long)]
    q_bc: u64,
    #[arg(long)]
    d_s2: u64,
    /// Broadcast volume of the high-cost branch; enables the two-branch
    /// recommendation.
    #[arg(long, requires = "high_d_s2")]
    high_q_bc: Option<u64>,
    #[arg(long, requires = "high_q_bc")]
    high_d_s2: Option<u64>,
    /// Probability of the low-cost branch.
    #[arg(long, default_value_t = 0.9)]
    prob_low: f64,
}

#[derive(Args)]
struct EstimateArgs {
    /// Sample graph the model is fitted on.
    #[arg(short, long)]
    graph: PathBuf,
    #[arg(short, long)]
    expr: String,
    #[arg(long)]
    classes: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Product-state cap per run.
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    /// Virtual node count; defaults to the sample's.
    #[arg(long)]
    target_nodes: Option<u64>,
    /// Estimated total edge count; defaults to the sample's.
    #[arg(long)]
    target_edges: Option<u64>,
    /// Restrict CCDF output to runs with non-zero cost.
    #[arg(long)]
    nonzero_only: bool,
    /// Directory for the CCDF CSV files.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct NetstatsArgs {
    #[arg(short, long)]
    graph: PathBuf,
    #[command(flatten)]
    net: NetArgs,
    /// Number of random resource probes for the replication estimate.
    #[arg(long)]
    probe_sample: Option<usize>,
    /// Seed for probe selection.
    #[arg(long, default_value_t = 1)]
    probe_seed: u64,
    /// Directory for ledger.csv.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(short, long)]
    graph: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Query(args) => commands::query(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Decide(args) => commands::decide(args),
        Command::Estimate(args) => commands::estimate(args),
        Command::Netstats(args) => commands::netstats(args),
        Command::Stats(args) => commands::stats(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err.class() {
                ErrorClass::Parse => 2,
                ErrorClass::Io => 3,
                ErrorClass::Config => 4,
                ErrorClass::Refusal => 5,
            })
        }
    }
}
