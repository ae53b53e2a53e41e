//! Exact search, recall and throughput measurement.

use std::collections::{BinaryHeap, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::collections::ScoredId;
use crate::data::{seeded_stream, Dataset, GroundTruth};
use crate::error::{Error, Result};
use crate::graph::SearchGraph;
use crate::params::SearchParams;
use crate::search::QueryContext;

/// The `min(k, n)` smallest `(dist, id)` pairs by full scan, nearest first.
pub fn exact_knn<D: Dataset>(data: &D, q: &D::Item, k: usize) -> Result<Vec<ScoredId>> {
    if data.is_empty() {
        return Err(Error::usage("exact search over an empty dataset"));
    }
    if k == 0 {
        return Err(Error::usage("k must be at least 1"));
    }
    // max-heap on (dist, id): the root is the current k-th neighbor
    let mut heap: BinaryHeap<ScoredId> = BinaryHeap::with_capacity(k + 1);
    for id in 0..data.len() {
        let item = ScoredId::new(data.distance_to(q, id), id as u32);
        if heap.len() < k {
            heap.push(item);
        } else if item < *heap.peek().unwrap() {
            heap.pop();
            heap.push(item);
        }
    }
    Ok(heap.into_sorted_vec())
}

/// Exact neighbors for every query in `queries`, computed in parallel.
pub fn ground_truth<D: Dataset>(data: &D, queries: &D, k: usize) -> Result<GroundTruth> {
    if k > data.len() {
        return Err(Error::usage(format!(
            "k = {k} exceeds the dataset size {}",
            data.len()
        )));
    }
    let rows = (0..queries.len())
        .into_par_iter()
        .map(|i| exact_knn(data, queries.item(i), k))
        .collect::<Result<Vec<_>>>()?;
    GroundTruth::from_results(k, rows)
}

/// Fraction of `exact` ids present in `approx`.
pub fn recall(approx: impl IntoIterator<Item = u32>, exact: &[u32]) -> f64 {
    if exact.is_empty() {
        return 1.0;
    }
    let found: HashSet<u32> = approx.into_iter().collect();
    let hits = exact.iter().filter(|id| found.contains(id)).count();
    hits as f64 / exact.len() as f64
}

/// Arithmetic mean over queries.
pub fn macro_recall(per_query: &[f64]) -> Result<f64> {
    if per_query.is_empty() {
        return Err(Error::usage("no recall values to average"));
    }
    Ok(per_query.iter().sum::<f64>() / per_query.len() as f64)
}

pub fn queries_per_second(num_queries: usize, elapsed_seconds: f64) -> Result<f64> {
    if !(elapsed_seconds > 0.0) {
        return Err(Error::usage(format!(
            "elapsed time must be positive, got {elapsed_seconds}"
        )));
    }
    Ok(num_queries as f64 / elapsed_seconds)
}

/// One configuration's measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub name: String,
    pub recall: f64,
    pub qps: f64,
    pub mean_dist_evals: f64,
    pub mean_hops: f64,
    /// Index construction time; never part of `qps`.
    pub build_seconds: Option<f64>,
    pub per_query_recall: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Queries ran on several threads; `qps` is not comparable to
    /// single-core numbers.
    pub parallel: bool,
}

pub const CSV_HEADER: &str = "name,recall,qps,mean_dist_evals,mean_hops";

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.6},{:.3},{:.3},{:.3}",
                csv_field(&r.name),
                r.recall,
                r.qps,
                r.mean_dist_evals,
                r.mean_hops
            );
        }
        out
    }

    /// Aligned, human readable version of the report.
    pub fn to_table(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        let mut out = format!(
            "{:<width$}  {:>7}  {:>10}  {:>12}  {:>10}  {:>9}\n",
            "name", "recall", "q/s", "dist evals", "hops", "build s"
        );
        for r in &self.rows {
            let build = r
                .build_seconds
                .map_or_else(|| "-".to_string(), |s| format!("{s:.2}"));
            let _ = writeln!(
                out,
                "{:<width$}  {:>7.4}  {:>10.1}  {:>12.1}  {:>10.1}  {:>9}",
                r.name, r.recall, r.qps, r.mean_dist_evals, r.mean_hops, build
            );
        }
        if self.parallel {
            out.push_str("note: queries ran in parallel; q/s is machine dependent\n");
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs every query against `graph`, timing only the query loop.
///
/// Query `i` draws its random choices from `seeded_stream(seed, i)`, so the
/// outcome does not depend on scheduling when `parallel` is set.
pub fn bench_queries<D: Dataset>(
    name: impl Into<String>,
    graph: &SearchGraph<D>,
    queries: &D,
    gt: &GroundTruth,
    params: &SearchParams,
    seed: u64,
    parallel: bool,
) -> Result<BenchRow> {
    if queries.len() != gt.len() {
        return Err(Error::usage(format!(
            "{} queries but ground truth covers {}",
            queries.len(),
            gt.len()
        )));
    }
    if queries.is_empty() {
        return Err(Error::usage("no queries"));
    }
    params.validate()?;
    let k = gt.k();
    let run = |ctx: &mut QueryContext, i: usize| {
        ctx.reseed(seeded_stream(seed, i as u64));
        graph.search_with(queries.item(i), k, params, ctx)
    };

    let start = Instant::now();
    let results = if parallel {
        (0..queries.len())
            .into_par_iter()
            .map_init(|| QueryContext::new(seed), |ctx, i| run(ctx, i))
            .collect::<Result<Vec<_>>>()?
    } else {
        let mut ctx = QueryContext::new(seed);
        (0..queries.len())
            .map(|i| run(&mut ctx, i))
            .collect::<Result<Vec<_>>>()?
    };
    let elapsed = start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);

    let per_query_recall: Vec<f64> = results
        .iter()
        .enumerate()
        .map(|(i, r)| recall(r.ids(), &gt.ids(i).collect::<Vec<_>>()))
        .collect();
    let nq = results.len() as f64;
    Ok(BenchRow {
        name: name.into(),
        recall: macro_recall(&per_query_recall)?,
        qps: queries_per_second(results.len(), elapsed)?,
        mean_dist_evals: results
            .iter()
            .map(|r| r.stats.distance_evaluations as f64)
            .sum::<f64>()
            / nq,
        mean_hops: results.iter().map(|r| r.stats.hops as f64).sum::<f64>() / nq,
        build_seconds: None,
        per_query_recall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_rvec, DenseDataset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sort_all(data: &DenseDataset, q: &[f32], k: usize) -> Vec<ScoredId> {
        let mut all: Vec<ScoredId> = (0..data.len())
            .map(|i| ScoredId::new(data.distance_to(q, i), i as u32))
            .collect();
        all.sort();
        all.truncate(k);
        all
    }

    #[test]
    fn exact_examples() {
        let one = gen_rvec(3, 1, 0).unwrap();
        assert_eq!(exact_knn(&one, &[0.0; 3], 5).unwrap().len(), 1);
        let d = gen_rvec(3, 20, 0).unwrap();
        let r = exact_knn(&d, d.item(5), 1).unwrap();
        assert_eq!(r, vec![ScoredId::new(0.0, 5)]);
        assert!(exact_knn(&d, d.item(5), 0).is_err());
        assert!(exact_knn(&DenseDataset::new(3).unwrap(), &[0.0; 3], 1).is_err());
    }

    #[test]
    fn exact_agrees_with_sorting() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for trial in 0..50 {
            let n = rng.gen_range(1..300);
            // coarse grid so that ties actually happen
            let data = DenseDataset::from_flat(
                2,
                (0..2 * n).map(|_| rng.gen_range(0..4) as f32).collect(),
            )
            .unwrap();
            let q = [rng.gen_range(0..4) as f32, 0.5];
            let k = rng.gen_range(1..40);
            assert_eq!(exact_knn(&data, &q, k).unwrap(), sort_all(&data, &q, k), "trial {trial}");
        }
    }

    #[test]
    fn recall_examples() {
        assert_eq!(recall([1, 2, 3], &[1, 2, 3]), 1.0);
        assert_eq!(recall([3, 1, 2], &[1, 2, 3]), 1.0);
        assert_eq!(recall([4, 5], &[1, 2]), 0.0);
        assert_eq!(recall([1, 2, 3, 9], &[1, 2, 3, 4]), 0.75);
    }

    #[test]
    fn averages() {
        assert_eq!(macro_recall(&[1.0]).unwrap(), 1.0);
        assert_eq!(macro_recall(&[1.0, 0.0]).unwrap(), 0.5);
        assert!(macro_recall(&[]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..256).map(|_| rng.gen()).collect();
        let mut reference = 0.0;
        for x in &xs {
            reference += x;
        }
        assert!((macro_recall(&xs).unwrap() - reference / 256.0).abs() < 1e-12);
    }

    #[test]
    fn throughput() {
        assert_eq!(queries_per_second(100, 1.0).unwrap(), 100.0);
        assert_eq!(queries_per_second(256, 0.5).unwrap(), 512.0);
        // one sequential scan per 5 ms
        assert!((queries_per_second(1, 0.005).unwrap() - 200.0).abs() < 1e-9);
        assert!(queries_per_second(1, 0.0).is_err());
        assert!(queries_per_second(1, -1.0).is_err());
    }

    #[test]
    fn csv_shape() {
        let report = BenchReport {
            rows: vec![BenchRow {
                name: "beam b=8, N=8".into(),
                recall: 0.5,
                qps: 10.0,
                mean_dist_evals: 3.0,
                mean_hops: 1.0,
                build_seconds: Some(1.0),
                per_query_recall: vec![],
            }],
            parallel: false,
        };
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "\"beam b=8, N=8\",0.500000,10.000,3.000,1.000");
        assert!(report.to_table().contains("beam b=8, N=8"));
    }
}
