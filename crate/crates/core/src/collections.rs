//! Working state shared by all query algorithms: result queues, candidate
//! queues and visited marks.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// A database id together with its distance to the current query.
///
/// Ordered lexicographically by `(dist, id)`, which is the only tie-break
/// used anywhere in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredId {
    pub dist: f64,
    pub id: u32,
}

impl ScoredId {
    pub fn new(dist: f64, id: u32) -> Self {
        Self { dist, id }
    }
}

impl Eq for ScoredId {}

impl PartialOrd for ScoredId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ScoredId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| self.id.cmp(&other.id))
    }
}

/// The `k` best pairs seen so far, kept sorted nearest first.
///
/// Ids are unique within the queue. Capacities in practice are small (k or a
/// beam width), so a sorted vector beats a heap here.
#[derive(Debug, Clone)]
pub struct KnnQueue {
    capacity: usize,
    items: Vec<ScoredId>,
}

impl KnnQueue {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "KnnQueue capacity must be positive");
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1024) + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.items.len() >= self.capacity
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }

    /// Offers a pair to the queue; returns whether it was kept.
    ///
    /// A repeated id replaces the stored pair only if it improves on it.
    pub fn push(&mut self, item: ScoredId) -> bool {
        debug_assert!(item.dist.is_finite());
        if self.is_full() {
            let last = self.items[self.items.len() - 1];
            // finite distances, so plain comparisons agree with `Ord`
            if item.dist > last.dist || (item.dist == last.dist && item.id >= last.id) {
                return false;
            }
        }
        let pos = match self.items.binary_search(&item) {
            Ok(_) => return false,
            Err(pos) => pos,
        };
        if let Some(old) = self.items.iter().position(|x| x.id == item.id) {
            if old < pos {
                return false;
            }
            self.items.remove(old);
        }
        self.items.insert(pos, item);
        if self.items.len() > self.capacity {
            self.items.pop();
        }
        true
    }

    /// Distance to the farthest kept pair when the queue is full, otherwise
    /// `f64::INFINITY`.
    pub fn covering_radius(&self) -> f64 {
        if self.is_full() {
            self.items[self.items.len() - 1].dist
        } else {
            f64::INFINITY
        }
    }

    pub fn nearest(&self) -> Option<ScoredId> {
        self.items.first().copied()
    }

    pub fn farthest(&self) -> Option<ScoredId> {
        self.items.last().copied()
    }

    /// Merges `src` into `self`, keeping the best distinct ids.
    pub fn merge_from(&mut self, src: &KnnQueue) -> Result<()> {
        if self.capacity != src.capacity {
            return Err(Error::usage(format!(
                "cannot merge queues of capacity {} and {}",
                src.capacity, self.capacity
            )));
        }
        for &item in &src.items {
            self.push(item);
        }
        Ok(())
    }

    /// Contents in non-decreasing `(dist, id)` order.
    pub fn as_slice(&self) -> &[ScoredId] {
        &self.items
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScoredId> {
        self.items.iter()
    }

    pub fn into_sorted_vec(self) -> Vec<ScoredId> {
        self.items
    }
}

/// Unbounded nearest-first queue.
#[derive(Debug, Clone, Default)]
pub struct CandidateQueue {
    heap: BinaryHeap<Reverse<ScoredId>>,
}

impl CandidateQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, item: ScoredId) {
        self.heap.push(Reverse(item));
    }

    /// Removes the minimal `(dist, id)` pair.
    pub fn pop_nearest(&mut self) -> Result<ScoredId> {
        self.pop().ok_or_else(|| Error::usage("pop from an empty candidate queue"))
    }

    pub fn pop(&mut self) -> Option<ScoredId> {
        self.heap.pop().map(|Reverse(item)| item)
    }

    pub fn peek(&self) -> Option<ScoredId> {
        self.heap.peek().map(|Reverse(item)| *item)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn clear(&mut self) {
        self.heap.clear();
    }
}

/// Membership over item ids, cleared in O(1) by bumping an epoch.
///
/// Storage grows on demand to the largest id inserted, so one set can be
/// reused across queries on a growing graph.
#[derive(Debug, Clone)]
pub struct VisitedSet {
    marks: Vec<u32>,
    epoch: u32,
    len: usize,
}

impl Default for VisitedSet {
    fn default() -> Self {
        Self::new()
    }
}

impl VisitedSet {
    pub fn new() -> Self {
        Self {
            marks: Vec::new(),
            epoch: 1,
            len: 0,
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        let mut set = Self::new();
        set.marks.resize(n, 0);
        set
    }

    /// Marks `id`; returns `true` if it was not yet present.
    #[inline]
    pub fn insert(&mut self, id: u32) -> bool {
        let i = id as usize;
        if i >= self.marks.len() {
            self.marks.resize((i + 1).max(self.marks.len() * 2), 0);
        }
        if self.marks[i] == self.epoch {
            false
        } else {
            self.marks[i] = self.epoch;
            self.len += 1;
            true
        }
    }

    #[inline]
    pub fn contains(&self, id: u32) -> bool {
        self.marks.get(id as usize) == Some(&self.epoch)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn clear(&mut self) {
        self.len = 0;
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.fill(0);
            self.epoch = 1;
        }
    }
}
