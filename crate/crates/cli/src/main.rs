//! `apgraph` command-line harness: dataset generation, ground truth, index
//! construction, ad-hoc search and benchmark grids.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data or format errors.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use apgraph::DatasetKind;

#[derive(Debug, Parser)]
#[command(name = "apgraph", version, about = "Proximity-graph kNN search toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a uniform random dense dataset.
    Gen(GenArgs),
    /// Compute exact k nearest neighbors for a query set.
    Gt(GtArgs),
    /// Build a search graph and optionally save it.
    Build(BuildArgs),
    /// Measure recall and throughput over a grid of configurations.
    Bench(BenchArgs),
    /// Answer a single query against a saved graph.
    Search(SearchArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: String,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    #[arg(long)]
    dataset: String,
    #[arg(long, default_value = "dense", value_parser = parse_kind)]
    kind: DatasetKind,
}

#[derive(Debug, Args)]
struct GtArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long)]
    queries: String,
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long)]
    out: String,
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// apg, apg-star, apg-star-r or beam; `bench` accepts a comma separated
    /// list and runs every variant when omitted.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, default_value_t = apgraph::params::DEFAULT_SIGMA)]
    sigma: usize,
    /// Restarts for apg (comma separated list for `bench`).
    #[arg(long)]
    m: Option<String>,
    /// Beam width (comma separated list for `bench`).
    #[arg(long)]
    beam: Option<String>,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Forward links per insertion (N).
    #[arg(long, default_value_t = 16)]
    n_links: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long)]
    queries: String,
    #[arg(long)]
    gt: String,
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[command(flatten)]
    params: ParamArgs,
    /// Comma separated list of N values.
    #[arg(long, default_value = "8,16,32")]
    n_links: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path; an aligned table is written next to it as `.txt`.
    #[arg(long)]
    out: Option<String>,
    /// Run queries on all cores (q/s then depends on the machine's core count).
    #[arg(long)]
    parallel: bool,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long)]
    graph: String,
    #[command(flatten)]
    data: DatasetArgs,
    /// File holding the query (same kind as the dataset).
    #[arg(long)]
    queries: Option<String>,
    #[arg(long, default_value_t = 0)]
    query_index: usize,
    /// Use this dataset item as the query instead of `--queries`.
    #[arg(long, conflicts_with = "queries")]
    query_id: Option<usize>,
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_kind(s: &str) -> Result<DatasetKind, String> {
    s.parse().map_err(|e: apgraph::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Gt(a) => commands::gt(a),
        Command::Build(a) => commands::build(a),
        Command::Bench(a) => commands::bench(a),
        Command::Search(a) => commands::search(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<apgraph::Error>() {
        Some(apgraph::Error::Usage(_)) => 1,
        Some(_) => 2,
        None if e.downcast_ref::<std::io::Error>().is_some() => 2,
        None => 1,
    }
}
