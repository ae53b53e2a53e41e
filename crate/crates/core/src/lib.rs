//! Approximate k-nearest-neighbor search over incrementally built proximity
//! graphs.
//!
//! A [`SearchGraph`] links every inserted item to the `N` neighbors found by
//! searching the graph built so far. Queries run one of four local-search
//! strategies selected through [`SearchParams`]:
//!
//! * [`Variant::Apg`]: greedy descents from `m` random starts,
//! * [`Variant::ApgStar`]: best-first expansion with an on-line stopping rule,
//! * [`Variant::ApgStarR`]: random-restart local walks with the same rule,
//! * [`Variant::Beam`]: beam search of width `b`.
//!
//! ```
//! use apgraph::{gen_rvec, QueryContext, SearchGraph, SearchParams};
//!
//! let data = gen_rvec(8, 500, 1).unwrap();
//! let queries = gen_rvec(8, 1, 2).unwrap();
//! let graph = SearchGraph::build(data, SearchParams::beam(8), 8, 42).unwrap();
//! let mut ctx = QueryContext::new(7);
//! let result = graph.search(queries.as_flat(), 10, &mut ctx).unwrap();
//! assert_eq!(result.pairs.len(), 10);
//! ```

pub mod collections;
pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod metrics;
pub mod params;
pub mod search;

pub use collections::{CandidateQueue, KnnQueue, ScoredId, VisitedSet};
pub use data::{
    gen_rvec, read_dense, read_gt, read_sparse, read_strings, seeded_stream, write_dense,
    write_gt, write_sparse, write_strings, Dataset, DatasetHandle, DatasetKind, DenseDataset,
    GroundTruth, GtRecord, SparseDataset, StringDataset,
};
pub use error::{Error, Location, Result};
pub use eval::{
    bench_queries, exact_knn, ground_truth, macro_recall, queries_per_second, recall, BenchReport,
    BenchRow,
};
pub use graph::{graph_stats, read_graph, write_graph, GraphFile, GraphStats, SearchGraph};
pub use metrics::{angle_distance, l2_distance, levenshtein, SparseVector};
pub use params::{SearchParams, Variant};
pub use search::{
    estimate_restarts, search_apg, search_apg_star, search_apg_star_r, search_beam, GraphView,
    QueryContext, SearchResult, SearchStats,
};
