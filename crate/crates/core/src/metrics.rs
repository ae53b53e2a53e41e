//! Distance functions for dense vectors, strings and sparse term vectors.
//!
//! Every metric returns an `f64`. Dense coordinates are stored as `f32` but
//! accumulated in double precision so that near-ties order the same way on
//! every platform.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Euclidean distance between two dense vectors of the same length.
pub fn l2_distance(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::usage(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    Ok(l2_unchecked(u, v))
}

#[inline]
pub(crate) fn l2_unchecked(u: &[f32], v: &[f32]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    const LANES: usize = 8;
    let mut acc = [0f64; LANES];
    let (a, b) = (u.chunks_exact(LANES), v.chunks_exact(LANES));
    let (ra, rb) = (a.remainder(), b.remainder());
    for (x, y) in a.zip(b) {
        let x: &[f32; LANES] = x.try_into().unwrap();
        let y: &[f32; LANES] = y.try_into().unwrap();
        for i in 0..LANES {
            let d = x[i] as f64 - y[i] as f64;
            acc[i] += d * d;
        }
    }
    let mut sum = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        let d = *x as f64 - *y as f64;
        sum += d * d;
    }
    sum.sqrt()
}

/// Edit distance counting single code point insertions, deletions and
/// substitutions.
pub fn levenshtein(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub fn levenshtein_chars(a: &[char], b: &[char]) -> f64 {
    // Strip the common prefix and suffix; they never contribute.
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[prefix..], &b[prefix..]);
    let suffix = a
        .iter()
        .rev()
        .zip(b.iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    let (a, b) = (&a[..a.len() - suffix], &b[..b.len() - suffix]);
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len() as f64;
    }

    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(lc != sc);
            row[j + 1] = (diag + cost).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[short.len()] as f64
}

/// A tf-idf style vector: strictly increasing term ids with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
    norm: f64,
}

impl SparseVector {
    /// Builds a vector from `(term, weight)` pairs in any order.
    ///
    /// Rejects empty input, repeated terms and weights that are not finite
    /// and strictly positive.
    pub fn new(mut entries: Vec<(u32, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::usage("sparse vector has no entries"));
        }
        if let Some((t, w)) = entries.iter().find(|(_, w)| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::usage(format!(
                "term {t} has non-positive or non-finite weight {w}"
            )));
        }
        entries.sort_by_key(|(t, _)| *t);
        if let Some(pair) = entries.windows(2).find(|p| p[0].0 == p[1].0) {
            return Err(Error::usage(format!("duplicate term id {}", pair[0].0)));
        }
        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        Ok(Self { entries, norm })
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }
}

/// Angle in radians between two sparse vectors, always within `[0, pi]`.
pub fn angle_distance(u: &SparseVector, v: &SparseVector) -> f64 {
    let cos = (u.dot(v) / (u.norm * v.norm)).clamp(-1.0, 1.0);
    // acos(1 - eps) is ~sqrt(2 eps), so identical vectors must short-circuit
    // to keep d(u, u) = 0.
    if u == v {
        return 0.0;
    }
    cos.acos().clamp(0.0, PI)
}
