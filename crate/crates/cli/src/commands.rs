use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};

use apgraph::data::{write_dense, write_gt};
use apgraph::eval::bench_queries;
use apgraph::graph::{read_graph, write_graph};
use apgraph::{
    gen_rvec, ground_truth, read_gt, BenchReport, Dataset, DatasetHandle, Error, QueryContext,
    SearchGraph, SearchParams, Variant,
};

use crate::{BenchArgs, BuildArgs, GenArgs, GtArgs, ParamArgs, SearchArgs};

/// Runs `$body` with `$d` (and the optional `$q`) bound to the concrete
/// dataset types behind matching handles.
macro_rules! with_datasets {
    ($data:expr, $queries:expr, |$d:ident, $q:ident| $body:expr) => {
        match ($data, $queries) {
            (DatasetHandle::Dense($d), DatasetHandle::Dense($q)) => $body,
            (DatasetHandle::String($d), DatasetHandle::String($q)) => $body,
            (DatasetHandle::Sparse($d), DatasetHandle::Sparse($q)) => $body,
            _ => Err(Error::Usage("dataset and queries are of different kinds".into()).into()),
        }
    };
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::Usage(msg.into()).into()
}

fn load(path: &str, kind: apgraph::DatasetKind) -> Result<DatasetHandle> {
    DatasetHandle::load(kind, path).with_context(|| format!("loading {path}"))
}

pub fn gen(args: GenArgs) -> Result<()> {
    let data = gen_rvec(args.dim, args.n, args.seed)?;
    write_dense(&args.out, &data).with_context(|| format!("writing {}", args.out))?;
    eprintln!("wrote {} vectors of dimension {} to {}", args.n, args.dim, args.out);
    Ok(())
}

pub fn gt(args: GtArgs) -> Result<()> {
    let data = load(&args.data.dataset, args.data.kind)?;
    let queries = load(&args.queries, args.data.kind)?;
    if args.k == 0 {
        return Err(usage("k must be at least 1"));
    }
    if args.k > data.len() {
        return Err(usage(format!(
            "k = {} exceeds the dataset size {}; ground truth needs k <= n",
            args.k,
            data.len()
        )));
    }
    let start = Instant::now();
    let gt = with_datasets!(&data, &queries, |d, q| ground_truth(d, q, args.k))?;
    write_gt(&args.out, &gt).with_context(|| format!("writing {}", args.out))?;
    eprintln!(
        "ground truth: {} queries, k = {}, {:.2}s -> {}",
        gt.len(),
        args.k,
        start.elapsed().as_secs_f64(),
        args.out
    );
    Ok(())
}

fn parse_list(name: &str, raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("--{name}: {s:?} is not a non-negative integer")))
        })
        .collect()
}

/// Expands the parameter flags into concrete configurations.
fn configurations(p: &ParamArgs, default_grid: bool) -> Result<Vec<SearchParams>> {
    let restarts = parse_list("m", p.m.as_deref().unwrap_or("8,16,32"))?;
    let beams = parse_list("beam", p.beam.as_deref().unwrap_or("8,16,32"))?;
    let variants: Vec<Variant> = match &p.variant {
        Some(v) => v
            .split(',')
            .map(|s| s.trim().parse::<Variant>().map_err(anyhow::Error::from))
            .collect::<Result<_>>()?,
        None if default_grid => Variant::ALL.to_vec(),
        None => vec![Variant::ApgStar],
    };
    let mut out = Vec::new();
    for variant in variants {
        let base = SearchParams::new(variant).with_sigma(p.sigma);
        match variant {
            Variant::Apg => out.extend(restarts.iter().map(|&m| SearchParams { restarts: m, ..base })),
            Variant::Beam => out.extend(beams.iter().map(|&b| SearchParams { beam: b, ..base })),
            _ => out.push(base),
        }
    }
    for params in &out {
        params.validate()?;
    }
    Ok(out)
}

fn single_configuration(p: &ParamArgs, fallback: Variant) -> Result<SearchParams> {
    let defaults = SearchParams::new(fallback);
    let variant = match &p.variant {
        Some(v) => v.parse::<Variant>()?,
        None => fallback,
    };
    let one = |name: &str, raw: &Option<String>, default: usize| -> Result<usize> {
        match raw {
            None => Ok(default),
            Some(raw) => match parse_list(name, raw)?.as_slice() {
                [x] => Ok(*x),
                _ => Err(usage(format!("--{name} takes a single value here"))),
            },
        }
    };
    let params = SearchParams {
        variant,
        sigma: p.sigma,
        restarts: one("m", &p.m, defaults.restarts)?,
        beam: one("beam", &p.beam, defaults.beam)?,
    };
    params.validate()?;
    Ok(params)
}

pub fn build(args: BuildArgs) -> Result<()> {
    let params = single_configuration(&args.params, Variant::ApgStar)?;
    match load(&args.data.dataset, args.data.kind)? {
        DatasetHandle::Dense(d) => build_one(d, &params, &args),
        DatasetHandle::String(d) => build_one(d, &params, &args),
        DatasetHandle::Sparse(d) => build_one(d, &params, &args),
    }
}

fn build_one<D: Dataset>(data: D, params: &SearchParams, args: &BuildArgs) -> Result<()> {
    let start = Instant::now();
    let graph = SearchGraph::build(data, *params, args.n_links, args.seed)?;
    let elapsed = start.elapsed().as_secs_f64();
    let s = graph.stats();
    println!(
        "built {} N={} over {} items in {:.2}s: degree min {} mean {:.2} max {}, connected {}",
        params.label(),
        args.n_links,
        s.n,
        elapsed,
        s.min_degree,
        s.mean_degree,
        s.max_degree,
        s.connected
    );
    if let Some(out) = &args.out {
        write_graph(out, &graph).with_context(|| format!("writing {out}"))?;
        println!("graph written to {out}");
    }
    Ok(())
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let configs = configurations(&args.params, true)?;
    let links = parse_list("n-links", &args.n_links)?;
    if links.contains(&0) {
        return Err(usage("--n-links values must be at least 1"));
    }
    let data = load(&args.data.dataset, args.data.kind)?;
    let queries = load(&args.queries, args.data.kind)?;
    let gt = read_gt(&args.gt).with_context(|| format!("loading {}", args.gt))?;
    if gt.k() != args.k {
        return Err(usage(format!(
            "--k {} does not match the ground truth file (k = {})",
            args.k,
            gt.k()
        )));
    }
    if gt.len() != queries.len() {
        return Err(usage(format!(
            "ground truth covers {} queries but the query file has {}",
            gt.len(),
            queries.len()
        )));
    }
    let mut report = BenchReport {
        rows: Vec::new(),
        parallel: args.parallel,
    };
    for &n_links in &links {
        for params in &configs {
            let row = with_datasets!(&data, &queries, |d, q| {
                bench_one(d, q, &gt, params, n_links, &args)
            })?;
            eprintln!(
                "{}: recall {:.4}, {:.1} q/s, build {:.2}s",
                row.name,
                row.recall,
                row.qps,
                row.build_seconds.unwrap_or_default()
            );
            report.rows.push(row);
        }
    }
    let table = report.to_table();
    print!("{table}");
    if let Some(out) = &args.out {
        std::fs::write(out, report.to_csv()).with_context(|| format!("writing {out}"))?;
        let txt = Path::new(out).with_extension("txt");
        std::fs::write(&txt, &table).with_context(|| format!("writing {}", txt.display()))?;
    }
    Ok(())
}

fn bench_one<D: Dataset + Clone>(
    data: &D,
    queries: &D,
    gt: &apgraph::GroundTruth,
    params: &SearchParams,
    n_links: usize,
    args: &BenchArgs,
) -> Result<apgraph::BenchRow> {
    let start = Instant::now();
    let graph = SearchGraph::build(data.clone(), *params, n_links, args.seed)?;
    let build_seconds = start.elapsed().as_secs_f64();
    let name = format!("{} N={}", params.label(), n_links);
    let mut row = bench_queries(name, &graph, queries, gt, params, args.seed, args.parallel)?;
    row.build_seconds = Some(build_seconds);
    Ok(row)
}

pub fn search(args: SearchArgs) -> Result<()> {
    let file = read_graph(&args.graph).with_context(|| format!("loading {}", args.graph))?;
    let params = single_configuration(&args.params, file.variant)?;
    let data = load(&args.data.dataset, args.data.kind)?;
    let queries = match (&args.queries, args.query_id) {
        (Some(path), _) => Some(load(path, args.data.kind)?),
        (None, Some(_)) => None,
        (None, None) => return Err(usage("pass --queries or --query-id")),
    };
    let queries = queries.as_ref().unwrap_or(&data);
    let index = match args.query_id {
        Some(id) => id,
        None => args.query_index,
    };
    if index >= queries.len() {
        return Err(usage(format!(
            "query {index} out of range ({} available)",
            queries.len()
        )));
    }
    with_datasets!(&data, queries, |d, q| {
        search_one(d.clone(), q.item(index), &file, params, &args)
    })
}

fn search_one<D: Dataset>(
    data: D,
    q: &D::Item,
    file: &apgraph::GraphFile,
    params: SearchParams,
    args: &SearchArgs,
) -> Result<()> {
    let graph = SearchGraph::from_parts(
        data,
        file.adjacency.clone(),
        file.n_links as usize,
        params,
        args.seed,
    )?;
    let mut ctx = QueryContext::new(args.seed);
    let result = graph.search(q, args.k, &mut ctx)?;
    for (rank, pair) in result.pairs.iter().enumerate() {
        println!("{}\t{}\t{}", rank + 1, pair.id, pair.dist);
    }
    let s = result.stats;
    println!(
        "# {}: n={} distance_evaluations={} restarts={} hops={} outer_iterations={}",
        params.label(),
        graph.len(),
        s.distance_evaluations,
        s.restarts,
        s.hops,
        s.outer_iterations
    );
    Ok(())
}
