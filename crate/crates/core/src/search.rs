//! Query algorithms over a proximity graph.
//!
//! All four strategies share one [`QueryContext`]: a visited set, a distance
//! cache (no database object is compared with the query twice) and the
//! random stream used to pick restart points.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::collections::{CandidateQueue, KnnQueue, ScoredId, VisitedSet};
use crate::data::{seeded_stream, Dataset};
use crate::error::{Error, Result};
use crate::params::{SearchParams, Variant};

/// Read-only view of an indexed prefix: `adjacency.len()` vertices, whose
/// items live at the same positions of `data`.
pub struct GraphView<'a, D: Dataset> {
    data: &'a D,
    adjacency: &'a [Vec<u32>],
}

impl<D: Dataset> Clone for GraphView<'_, D> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<D: Dataset> Copy for GraphView<'_, D> {}

impl<'a, D: Dataset> GraphView<'a, D> {
    pub fn new(data: &'a D, adjacency: &'a [Vec<u32>]) -> Self {
        debug_assert!(adjacency.len() <= data.len());
        Self { data, adjacency }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    #[inline]
    pub fn neighbors(&self, id: u32) -> &'a [u32] {
        &self.adjacency[id as usize]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub distance_evaluations: u64,
    /// Random restarts, tries or beam steps, depending on the variant.
    pub restarts: u64,
    /// Vertex expansions (neighborhood scans).
    pub hops: u64,
    pub outer_iterations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Up to `k` pairs in non-decreasing `(dist, id)` order.
    pub pairs: Vec<ScoredId>,
    pub stats: SearchStats,
}

impl SearchResult {
    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.pairs.iter().map(|p| p.id)
    }
}

/// Per-query mutable state; reusable across queries to avoid reallocation.
#[derive(Debug, Clone)]
pub struct QueryContext {
    visited: VisitedSet,
    evaluated: VisitedSet,
    dists: Vec<f64>,
    candidates: CandidateQueue,
    stats: SearchStats,
    rng: ChaCha8Rng,
    radius_trace: Option<Vec<f64>>,
}

/// Uniform draws tried before falling back to a scan.
const SAMPLE_ATTEMPTS: usize = 64;

impl QueryContext {
    pub fn new(seed: u64) -> Self {
        Self::with_rng(seeded_stream(seed, 0))
    }

    pub fn with_rng(rng: ChaCha8Rng) -> Self {
        Self {
            visited: VisitedSet::new(),
            evaluated: VisitedSet::new(),
            dists: Vec::new(),
            candidates: CandidateQueue::new(),
            stats: SearchStats::default(),
            rng,
            radius_trace: None,
        }
    }

    /// Replaces the random stream, e.g. one stream per query for reproducible
    /// benchmarks regardless of query order.
    pub fn reseed(&mut self, rng: ChaCha8Rng) {
        self.rng = rng;
    }

    /// Records the covering radius after every outer iteration (every
    /// restart for APG) of subsequent queries.
    pub fn trace_radius(&mut self, enabled: bool) {
        self.radius_trace = enabled.then(Vec::new);
    }

    /// Radii recorded for the last query, if tracing is enabled.
    pub fn radius_trace(&self) -> Option<&[f64]> {
        self.radius_trace.as_deref()
    }

    #[inline]
    fn record_radius(&mut self, radius: f64) {
        if let Some(trace) = &mut self.radius_trace {
            trace.push(radius);
        }
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    /// Number of ids whose distance to the current query is cached.
    pub fn cached(&self) -> usize {
        self.evaluated.len()
    }

    pub fn is_visited(&self, id: u32) -> bool {
        self.visited.contains(id)
    }

    pub fn is_evaluated(&self, id: u32) -> bool {
        self.evaluated.contains(id)
    }

    fn begin(&mut self, n: usize) {
        self.visited.clear();
        self.evaluated.clear();
        self.candidates.clear();
        if self.dists.len() < n {
            self.dists.resize(n, 0.0);
        }
        self.stats = SearchStats::default();
        if let Some(trace) = &mut self.radius_trace {
            trace.clear();
        }
    }

    /// Starts a new query over `n` vertices.
    pub fn reset(&mut self, n: usize) {
        self.begin(n);
    }

    /// Distance from `q` to `id`, computed at most once per query.
    #[inline]
    pub fn distance<D: Dataset>(&mut self, graph: GraphView<'_, D>, q: &D::Item, id: u32) -> f64 {
        if self.evaluated.insert(id) {
            let d = graph.data.distance_to(q, id as usize);
            if self.dists.len() <= id as usize {
                self.dists.resize(id as usize + 1, 0.0);
            }
            self.dists[id as usize] = d;
            self.stats.distance_evaluations += 1;
            d
        } else {
            self.dists[id as usize]
        }
    }

    /// [`distance`](Self::distance) plus marking `id` visited.
    #[inline]
    pub fn eval<D: Dataset>(&mut self, graph: GraphView<'_, D>, q: &D::Item, id: u32) -> f64 {
        self.visited.insert(id);
        self.distance(graph, q, id)
    }

    /// A uniformly drawn unvisited id, or `None` once all `n` are visited.
    pub fn random_unvisited(&mut self, n: usize) -> Option<u32> {
        if n == 0 || self.visited.len() >= n {
            return None;
        }
        for _ in 0..SAMPLE_ATTEMPTS {
            let id = self.rng.gen_range(0..n) as u32;
            if !self.visited.contains(id) {
                return Some(id);
            }
        }
        let start = self.rng.gen_range(0..n);
        (start..n)
            .chain(0..start)
            .map(|i| i as u32)
            .find(|&id| !self.visited.contains(id))
    }
}

fn check(graph_len: usize, k: usize) -> Result<()> {
    if graph_len == 0 {
        return Err(Error::usage("cannot search an empty graph"));
    }
    if k == 0 {
        return Err(Error::usage("k must be at least 1"));
    }
    Ok(())
}

/// Issues prefetches for the neighbors about to be compared, so the memory
/// loads overlap instead of stalling one distance at a time.
#[inline]
fn prefetch_where<D: Dataset>(graph: GraphView<'_, D>, ids: &[u32], pending: impl Fn(u32) -> bool) {
    for &u in ids {
        if pending(u) {
            graph.data.prefetch(u as usize);
        }
    }
}

/// Stopping rule shared by the sigma-driven algorithms: the covering radius
/// did not move during the last batch. An under-full result only stops the
/// search once every vertex has been visited, so `k >= n` returns everything.
#[inline]
fn converged(cov_before: f64, res: &KnnQueue, ctx: &QueryContext, n: usize) -> bool {
    cov_before == res.covering_radius() && (res.is_full() || ctx.visited.len() >= n)
}

fn finish(res: KnnQueue, ctx: &QueryContext) -> SearchResult {
    SearchResult {
        pairs: res.into_sorted_vec(),
        stats: ctx.stats,
    }
}

/// Dispatches to the algorithm selected by `params`.
pub fn search<D: Dataset>(
    graph: GraphView<'_, D>,
    q: &D::Item,
    k: usize,
    params: &SearchParams,
    ctx: &mut QueryContext,
) -> Result<SearchResult> {
    params.validate()?;
    match params.variant {
        Variant::Apg => search_apg(graph, q, k, params.restarts, ctx),
        Variant::ApgStar => search_apg_star(graph, q, k, params.sigma, ctx),
        Variant::ApgStarR => search_apg_star_r(graph, q, k, params.sigma, ctx),
        Variant::Beam => search_beam(graph, q, k, params.sigma, params.beam, ctx),
    }
}

/// Greedy search with a fixed number `m` of restarts.
///
/// Every restart seeds an empty candidate queue with one random unvisited
/// vertex and expands candidates best first, stopping once the nearest
/// remaining candidate lies beyond the covering radius of the shared result.
/// The visited set and result queue persist across restarts.
pub fn search_apg<D: Dataset>(
    graph: GraphView<'_, D>,
    q: &D::Item,
    k: usize,
    m: usize,
    ctx: &mut QueryContext,
) -> Result<SearchResult> {
    check(graph.len(), k)?;
    if m == 0 {
        return Err(Error::usage("APG needs at least one restart"));
    }
    let n = graph.len();
    ctx.begin(n);
    ctx.stats.outer_iterations = 1;
    let mut res = KnnQueue::new(k);
    let mut candidates = std::mem::take(&mut ctx.candidates);

    for _ in 0..m {
        let Some(start) = ctx.random_unvisited(n) else {
            break;
        };
        ctx.stats.restarts += 1;
        candidates.clear();
        let seed = ScoredId::new(ctx.eval(graph, q, start), start);
        candidates.push(seed);
        res.push(seed);
        expand_best_first(graph, q, &mut candidates, &mut res, ctx);
        ctx.record_radius(res.covering_radius());
    }
    candidates.clear();
    ctx.candidates = candidates;
    Ok(finish(res, ctx))
}

/// Drains `candidates` nearest first, expanding unvisited neighbors into
/// both queues, until the nearest candidate is farther than the covering
/// radius of `res`.
#[inline]
fn expand_best_first<D: Dataset>(
    graph: GraphView<'_, D>,
    q: &D::Item,
    candidates: &mut CandidateQueue,
    res: &mut KnnQueue,
    ctx: &mut QueryContext,
) {
    while let Some(best) = candidates.pop() {
        // Candidates pop in distance order, so nothing left behind can
        // improve the result either.
        if best.dist > res.covering_radius() {
            break;
        }
        ctx.stats.hops += 1;
        let neighbors = graph.neighbors(best.id);
        prefetch_where(graph, neighbors, |u| !ctx.is_visited(u));
        for &u in neighbors {
            if !ctx.is_visited(u) {
                let item = ScoredId::new(ctx.eval(graph, q, u), u);
                candidates.push(item);
                res.push(item);
            }
        }
    }
}

/// Best-first search with random seeds; stops once a batch of `sigma` tries
/// leaves the covering radius unchanged.
pub fn search_apg_star<D: Dataset>(
    graph: GraphView<'_, D>,
    q: &D::Item,
    k: usize,
    sigma: usize,
    ctx: &mut QueryContext,
) -> Result<SearchResult> {
    check(graph.len(), k)?;
    if sigma == 0 {
        return Err(Error::usage("sigma must be at least 1"));
    }
    let n = graph.len();
    ctx.begin(n);
    let mut res = KnnQueue::new(k);
    let mut candidates = std::mem::take(&mut ctx.candidates);

    loop {
        ctx.stats.outer_iterations += 1;
        let cov_before = res.covering_radius();
        for _ in 0..sigma {
            ctx.stats.restarts += 1;
            let Some(c) = ctx.random_unvisited(n) else {
                continue;
            };
            let seed = ScoredId::new(ctx.eval(graph, q, c), c);
            candidates.push(seed);
            res.push(seed);
            expand_best_first(graph, q, &mut candidates, &mut res, ctx);
        }
        ctx.record_radius(res.covering_radius());
        if converged(cov_before, &res, ctx, n) {
            break;
        }
    }
    candidates.clear();
    ctx.candidates = candidates;
    Ok(finish(res, ctx))
}

/// Local walks from random restart points, each collected in its own
/// `k`-queue and merged into the global result; stops like
/// [`search_apg_star`].
///
/// Within a walk, `visited` holds the expanded vertices while the shared
/// distance cache plays the role of the evaluated set.
pub fn search_apg_star_r<D: Dataset>(
    graph: GraphView<'_, D>,
    q: &D::Item,
    k: usize,
    sigma: usize,
    ctx: &mut QueryContext,
) -> Result<SearchResult> {
    check(graph.len(), k)?;
    if sigma == 0 {
        return Err(Error::usage("sigma must be at least 1"));
    }
    let n = graph.len();
    ctx.begin(n);
    let mut res = KnnQueue::new(k);
    let mut local = KnnQueue::new(k);

    loop {
        ctx.stats.outer_iterations += 1;
        let cov_before = res.covering_radius();
        for _ in 0..sigma {
            ctx.stats.restarts += 1;
            let Some(start) = ctx.random_unvisited(n) else {
                continue;
            };
            local.clear();
            local.push(ScoredId::new(ctx.eval(graph, q, start), start));
            let mut s = start;
            loop {
                ctx.stats.hops += 1;
                let neighbors = graph.neighbors(s);
                prefetch_where(graph, neighbors, |v| !ctx.is_evaluated(v));
                for &v in neighbors {
                    if !ctx.is_evaluated(v) {
                        local.push(ScoredId::new(ctx.distance(graph, q, v), v));
                    }
                }
                match local.iter().find(|p| !ctx.is_visited(p.id)) {
                    Some(next) => {
                        s = next.id;
                        ctx.visited.insert(s);
                    }
                    None => break,
                }
            }
            res.merge_from(&local)?;
        }
        ctx.record_radius(res.covering_radius());
        if converged(cov_before, &res, ctx, n) {
            break;
        }
    }
    Ok(finish(res, ctx))
}

/// Beam search of width `b`; stops like [`search_apg_star`].
///
/// An emptied beam is reseeded with one random unvisited vertex before the
/// next step.
pub fn search_beam<D: Dataset>(
    graph: GraphView<'_, D>,
    q: &D::Item,
    k: usize,
    sigma: usize,
    b: usize,
    ctx: &mut QueryContext,
) -> Result<SearchResult> {
    check(graph.len(), k)?;
    if sigma == 0 || b == 0 {
        return Err(Error::usage("sigma and beam width must be at least 1"));
    }
    let n = graph.len();
    ctx.begin(n);
    let mut res = KnnQueue::new(k);
    let mut beam: Vec<ScoredId> = Vec::with_capacity(b);
    let mut next = KnnQueue::new(b);

    for _ in 0..b.min(n) {
        let Some(u) = ctx.random_unvisited(n) else {
            break;
        };
        let item = ScoredId::new(ctx.eval(graph, q, u), u);
        res.push(item);
        beam.push(item);
    }

    loop {
        ctx.stats.outer_iterations += 1;
        let cov_before = res.covering_radius();
        for _ in 0..sigma {
            ctx.stats.restarts += 1;
            if beam.is_empty() {
                if let Some(u) = ctx.random_unvisited(n) {
                    let item = ScoredId::new(ctx.eval(graph, q, u), u);
                    res.push(item);
                    beam.push(item);
                }
            }
            next.clear();
            for c in &beam {
                ctx.stats.hops += 1;
                let neighbors = graph.neighbors(c.id);
                prefetch_where(graph, neighbors, |u| !ctx.is_visited(u));
                for &u in neighbors {
                    if !ctx.is_visited(u) {
                        let item = ScoredId::new(ctx.eval(graph, q, u), u);
                        res.push(item);
                        next.push(item);
                    }
                }
            }
            beam.clear();
            beam.extend_from_slice(next.as_slice());
        }
        ctx.record_radius(res.covering_radius());
        if converged(cov_before, &res, ctx, n) {
            break;
        }
    }
    Ok(finish(res, ctx))
}

/// Independent greedy tries needed to lift a per-try success probability
/// `p` to a target `p_target`: `ceil(log(1 - p_target) / log(1 - p))`.
pub fn estimate_restarts(p: f64, p_target: f64) -> Result<usize> {
    let open_unit = |x: f64| x > 0.0 && x < 1.0;
    if !open_unit(p) || !open_unit(p_target) {
        return Err(Error::usage(format!(
            "probabilities must lie in (0, 1), got p={p}, target={p_target}"
        )));
    }
    let tries = (1.0 - p_target).ln() / (1.0 - p).ln();
    // Exact ratios such as log(1/16)/log(1/2) may land an ulp above the integer.
    let rounded = tries.round();
    let m = if (tries - rounded).abs() <= 1e-9 * rounded.max(1.0) {
        rounded
    } else {
        tries.ceil()
    };
    Ok((m as usize).max(1))
}
