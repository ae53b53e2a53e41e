#![allow(dead_code)]

use apgraph::{Dataset, ScoredId, SearchParams};

/// Every variant with small settings, used where the choice should not matter.
pub fn all_variants() -> Vec<SearchParams> {
    vec![
        SearchParams::apg(4),
        SearchParams::apg_star(),
        SearchParams::apg_star_r(),
        SearchParams::beam(4),
    ]
}

/// Exact kNN by sorting every pair; shares no code with the library's scan.
pub fn sorted_knn<D: Dataset>(data: &D, q: &D::Item, k: usize) -> Vec<(u32, f64)> {
    let mut all: Vec<(f64, u32)> = (0..data.len())
        .map(|i| (data.distance(q, data.item(i)), i as u32))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|(d, i)| (i, d)).collect()
}

pub fn pairs(result: &[ScoredId]) -> Vec<(u32, f64)> {
    result.iter().map(|p| (p.id, p.dist)).collect()
}
