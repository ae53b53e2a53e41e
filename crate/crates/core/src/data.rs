//! Datasets, the synthetic uniform generator and the on-disk formats.
//!
//! Binary layouts (all integers little-endian):
//!
//! * dense vectors: `"RVC1"`, dimension `u32`, count `u64`, then
//!   `count * dimension` `f32` values row-major.
//! * ground truth: `"GT01"`, k `u32`, query count `u64`, then per query k
//!   records of (id `u32`, distance `f32`) in non-decreasing `(dist, id)` order.
//!
//! Strings are one item per line (UTF-8, blank lines skipped). Sparse vectors
//! are one per line as space separated `term:weight` tokens.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::collections::ScoredId;
use crate::error::{Error, Location, Result};
use crate::metrics::{angle_distance, l2_unchecked, levenshtein_chars, SparseVector};

pub const DENSE_MAGIC: &[u8; 4] = b"RVC1";
pub const GT_MAGIC: &[u8; 4] = b"GT01";

/// A database the graph can index: random access to items plus the metric.
pub trait Dataset: Send + Sync {
    type Item: ?Sized + Sync;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn item(&self, id: usize) -> &Self::Item;

    fn distance(&self, a: &Self::Item, b: &Self::Item) -> f64;

    /// Appends an item, rejecting one that does not belong to this domain.
    fn push(&mut self, item: &Self::Item) -> Result<()>;

    /// Hint that `id` will be compared soon. No-op unless overridden.
    #[inline]
    fn prefetch(&self, _id: usize) {}

    /// Distance from `q` to the stored item `id`.
    #[inline]
    fn distance_to(&self, q: &Self::Item, id: usize) -> f64 {
        self.distance(q, self.item(id))
    }
}

/// Row-major `f32` vectors under L2.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDataset {
    dim: usize,
    data: Vec<f32>,
}

impl DenseDataset {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::usage("dimension must be at least 1"));
        }
        Ok(Self {
            dim,
            data: Vec::new(),
        })
    }

    pub fn from_flat(dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::usage("dimension must be at least 1"));
        }
        if data.len() % dim != 0 {
            return Err(Error::usage(format!(
                "{} values do not divide into rows of {dim}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::usage("non-finite coordinate"));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_flat(&self) -> &[f32] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }
}

impl Dataset for DenseDataset {
    type Item = [f32];

    fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    fn item(&self, id: usize) -> &[f32] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    #[inline]
    fn distance(&self, a: &[f32], b: &[f32]) -> f64 {
        l2_unchecked(a, b)
    }

    #[inline]
    fn prefetch(&self, id: usize) {
        #[cfg(target_arch = "x86_64")]
        {
            use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
            let row = self.item(id);
            // 64-byte lines; rows of up to 16 floats need one, longer rows more.
            for chunk in row.chunks(16).take(4) {
                // SAFETY: prefetch is a hint and never faults; the pointer is in bounds.
                unsafe { _mm_prefetch(chunk.as_ptr() as *const i8, _MM_HINT_T0) };
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        let _ = id;
    }

    fn push(&mut self, item: &[f32]) -> Result<()> {
        if item.len() != self.dim {
            return Err(Error::usage(format!(
                "vector of dimension {} does not fit a dataset of dimension {}",
                item.len(),
                self.dim
            )));
        }
        if item.iter().any(|x| !x.is_finite()) {
            return Err(Error::usage("non-finite coordinate"));
        }
        self.data.extend_from_slice(item);
        Ok(())
    }
}

/// Strings under Levenshtein distance, kept as code point sequences.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StringDataset {
    items: Vec<Vec<char>>,
}

impl StringDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_strings<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            items: items.into_iter().map(|s| s.as_ref().chars().collect()).collect(),
        }
    }

    pub fn text(&self, id: usize) -> String {
        self.items[id].iter().collect()
    }
}

impl Dataset for StringDataset {
    type Item = [char];

    fn len(&self) -> usize {
        self.items.len()
    }

    fn item(&self, id: usize) -> &[char] {
        &self.items[id]
    }

    fn distance(&self, a: &[char], b: &[char]) -> f64 {
        levenshtein_chars(a, b)
    }

    fn push(&mut self, item: &[char]) -> Result<()> {
        self.items.push(item.to_vec());
        Ok(())
    }
}

/// Sparse term vectors under the angle metric.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseDataset {
    items: Vec<SparseVector>,
}

impl SparseDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_vectors(items: Vec<SparseVector>) -> Self {
        Self { items }
    }
}

impl Dataset for SparseDataset {
    type Item = SparseVector;

    fn len(&self) -> usize {
        self.items.len()
    }

    fn item(&self, id: usize) -> &SparseVector {
        &self.items[id]
    }

    fn distance(&self, a: &SparseVector, b: &SparseVector) -> f64 {
        angle_distance(a, b)
    }

    fn push(&mut self, item: &SparseVector) -> Result<()> {
        self.items.push(item.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Dense,
    String,
    Sparse,
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(DatasetKind::Dense),
            "string" => Ok(DatasetKind::String),
            "sparse" => Ok(DatasetKind::Sparse),
            other => Err(Error::usage(format!(
                "unknown dataset kind {other:?} (expected dense, string or sparse)"
            ))),
        }
    }
}

/// A loaded database of any supported kind.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetHandle {
    Dense(DenseDataset),
    String(StringDataset),
    Sparse(SparseDataset),
}

impl DatasetHandle {
    pub fn kind(&self) -> DatasetKind {
        match self {
            DatasetHandle::Dense(_) => DatasetKind::Dense,
            DatasetHandle::String(_) => DatasetKind::String,
            DatasetHandle::Sparse(_) => DatasetKind::Sparse,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            DatasetHandle::Dense(d) => d.len(),
            DatasetHandle::String(d) => d.len(),
            DatasetHandle::Sparse(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            DatasetHandle::Dense(d) => Some(d.dim()),
            _ => None,
        }
    }

    pub fn load(kind: DatasetKind, path: impl AsRef<Path>) -> Result<Self> {
        Ok(match kind {
            DatasetKind::Dense => DatasetHandle::Dense(read_dense(path)?),
            DatasetKind::String => DatasetHandle::String(read_strings(path)?),
            DatasetKind::Sparse => DatasetHandle::Sparse(read_sparse(path)?),
        })
    }
}

/// Derives the random stream used for the `stream`-th independent task under
/// `seed` (ChaCha8, seeded through `seed_from_u64`, stream id set explicitly).
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` vectors with i.i.d. uniform coordinates in `[0, 1)`.
///
/// Each coordinate takes the top 24 bits of one `next_u32` draw from
/// `seeded_stream(seed, 0)` and scales them by 2^-24, so the output is a pure
/// function of `(dim, n, seed)`.
pub fn gen_rvec(dim: usize, n: usize, seed: u64) -> Result<DenseDataset> {
    if dim == 0 || n == 0 {
        return Err(Error::usage("gen_rvec needs dim >= 1 and n >= 1"));
    }
    let mut rng = seeded_stream(seed, 0);
    let scale = 1.0 / (1u32 << 24) as f32;
    let data = (0..dim * n)
        .map(|_| (rng.next_u32() >> 8) as f32 * scale)
        .collect();
    DenseDataset::from_flat(dim, data)
}

pub fn write_dense(path: impl AsRef<Path>, data: &DenseDataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    encode_dense(&mut w, data)?;
    w.flush()?;
    Ok(())
}

pub fn encode_dense(w: &mut impl Write, data: &DenseDataset) -> Result<()> {
    w.write_all(DENSE_MAGIC)?;
    w.write_all(&(data.dim() as u32).to_le_bytes())?;
    w.write_all(&(data.len() as u64).to_le_bytes())?;
    for x in data.as_flat() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dense(path: impl AsRef<Path>) -> Result<DenseDataset> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_dense(&bytes)
}

pub fn decode_dense(bytes: &[u8]) -> Result<DenseDataset> {
    let mut r = ByteReader::new(bytes);
    r.magic(DENSE_MAGIC)?;
    let dim_at = r.offset();
    let dim = r.u32()? as usize;
    if dim == 0 {
        return Err(Error::format(Location::Byte(dim_at), "dimension is zero"));
    }
    let count_at = r.offset();
    let count = r.u64()?;
    if count == 0 {
        return Err(Error::format(Location::Byte(count_at), "dataset is empty"));
    }
    let values = (count as u128) * (dim as u128);
    let expected = values * 4;
    let remaining = r.remaining() as u128;
    if remaining != expected {
        return Err(Error::format(
            Location::Byte(r.offset() + remaining.min(expected) as u64),
            format!("payload holds {remaining} bytes, header implies {expected}"),
        ));
    }
    let mut data = Vec::with_capacity(values as usize);
    for i in 0..values as usize {
        let at = r.offset();
        let x = r.f32()?;
        if !x.is_finite() {
            return Err(Error::format(
                Location::Byte(at),
                format!("non-finite coordinate in vector {}", i / dim),
            ));
        }
        data.push(x);
    }
    DenseDataset::from_flat(dim, data)
}

/// One item per line; blank lines are skipped, everything else kept verbatim.
pub fn read_strings(path: impl AsRef<Path>) -> Result<StringDataset> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_strings(&bytes)
}

pub fn decode_strings(bytes: &[u8]) -> Result<StringDataset> {
    let mut items = Vec::new();
    for (i, line) in bytes.split(|b| *b == b'\n').enumerate() {
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        let text = std::str::from_utf8(line)
            .map_err(|e| Error::format(Location::Line(i + 1), format!("invalid UTF-8: {e}")))?;
        if !text.is_empty() {
            items.push(text.chars().collect());
        }
    }
    if items.is_empty() {
        return Err(Error::format(Location::Line(1), "no items"));
    }
    Ok(StringDataset { items })
}

pub fn write_strings(path: impl AsRef<Path>, data: &StringDataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in &data.items {
        let line: String = item.iter().collect();
        if line.contains('\n') {
            return Err(Error::usage("string item contains a newline"));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sparse(path: impl AsRef<Path>) -> Result<SparseDataset> {
    let reader = BufReader::new(File::open(path)?);
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => {
                Error::format(Location::Line(i + 1), "invalid UTF-8")
            }
            _ => Error::Io(e),
        })?;
        items.push(parse_sparse_line(&line, i + 1)?);
    }
    if items.is_empty() {
        return Err(Error::format(Location::Line(1), "no vectors"));
    }
    Ok(SparseDataset { items })
}

/// Parses one `term:weight term:weight ...` line (1-based `line_no` for errors).
pub fn parse_sparse_line(line: &str, line_no: usize) -> Result<SparseVector> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let mut entries: Vec<(u32, f64)> = Vec::new();
    let mut col = 1;
    for token in line.split(' ') {
        let at = Location::LineColumn(line_no, col);
        col += token.chars().count() + 1;
        if token.is_empty() {
            continue;
        }
        let (term, weight) = token
            .split_once(':')
            .ok_or_else(|| Error::format(at, format!("malformed token {token:?}")))?;
        let term: u32 = term
            .parse()
            .map_err(|_| Error::format(at, format!("bad term id in {token:?}")))?;
        let weight: f64 = weight
            .parse()
            .map_err(|_| Error::format(at, format!("bad weight in {token:?}")))?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::format(at, format!("weight must be positive in {token:?}")));
        }
        if entries.iter().any(|(t, _)| *t == term) {
            return Err(Error::format(at, format!("duplicate term id {term}")));
        }
        entries.push((term, weight));
    }
    if entries.is_empty() {
        return Err(Error::format(Location::Line(line_no), "empty vector"));
    }
    SparseVector::new(entries).map_err(|e| Error::format(Location::Line(line_no), e.to_string()))
}

pub fn write_sparse(path: impl AsRef<Path>, data: &SparseDataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in &data.items {
        let line: Vec<String> = v
            .entries()
            .iter()
            .map(|(t, x)| format!("{t}:{x}"))
            .collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

/// One ground-truth neighbor. Distances are stored in single precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtRecord {
    pub id: u32,
    pub dist: f32,
}

fn record_key(r: &GtRecord) -> (f32, u32) {
    (r.dist, r.id)
}

/// Exact neighbors for a query set, `k` per query.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    k: usize,
    rows: Vec<Vec<GtRecord>>,
}

impl GroundTruth {
    pub fn new(k: usize, rows: Vec<Vec<GtRecord>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::usage("ground truth k must be at least 1"));
        }
        for (q, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::usage(format!(
                    "query {q} has {} neighbors, expected {k}",
                    row.len()
                )));
            }
            if !is_sorted_records(row) {
                return Err(Error::usage(format!("query {q} is not in (dist, id) order")));
            }
        }
        Ok(Self { k, rows })
    }

    /// Converts exact results to single precision, re-sorting so that pairs
    /// collapsed by the rounding keep `(dist, id)` order.
    pub fn from_results(k: usize, results: Vec<Vec<ScoredId>>) -> Result<Self> {
        let rows = results
            .into_iter()
            .map(|row| {
                let mut row: Vec<GtRecord> = row
                    .into_iter()
                    .map(|s| GtRecord {
                        id: s.id,
                        dist: s.dist as f32,
                    })
                    .collect();
                row.sort_by(|a, b| {
                    a.dist.total_cmp(&b.dist).then_with(|| a.id.cmp(&b.id))
                });
                row
            })
            .collect();
        Self::new(k, rows)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, q: usize) -> &[GtRecord] {
        &self.rows[q]
    }

    pub fn ids(&self, q: usize) -> impl Iterator<Item = u32> + '_ {
        self.rows[q].iter().map(|r| r.id)
    }
}

fn is_sorted_records(row: &[GtRecord]) -> bool {
    row.windows(2).all(|p| {
        let (a, b) = (record_key(&p[0]), record_key(&p[1]));
        a.0 < b.0 || (a.0 == b.0 && a.1 <= b.1)
    })
}

pub fn write_gt(path: impl AsRef<Path>, gt: &GroundTruth) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    encode_gt(&mut w, gt)?;
    w.flush()?;
    Ok(())
}

pub fn encode_gt(w: &mut impl Write, gt: &GroundTruth) -> Result<()> {
    w.write_all(GT_MAGIC)?;
    w.write_all(&(gt.k as u32).to_le_bytes())?;
    w.write_all(&(gt.rows.len() as u64).to_le_bytes())?;
    for row in &gt.rows {
        for r in row {
            w.write_all(&r.id.to_le_bytes())?;
            w.write_all(&r.dist.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_gt(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_gt(&bytes)
}

pub fn decode_gt(bytes: &[u8]) -> Result<GroundTruth> {
    let mut r = ByteReader::new(bytes);
    r.magic(GT_MAGIC)?;
    let k_at = r.offset();
    let k = r.u32()? as usize;
    if k == 0 {
        return Err(Error::format(Location::Byte(k_at), "k is zero"));
    }
    let count = r.u64()?;
    let expected = count as u128 * k as u128 * 8;
    if r.remaining() as u128 != expected {
        return Err(Error::format(
            Location::Byte(r.offset()),
            format!("payload holds {} bytes, header implies {expected}", r.remaining()),
        ));
    }
    let mut rows = Vec::with_capacity(count as usize);
    for q in 0..count as usize {
        let mut row = Vec::with_capacity(k);
        for _ in 0..k {
            let id = r.u32()?;
            let dist = r.f32()?;
            if !(dist.is_finite() && dist >= 0.0) {
                return Err(Error::format(Location::Query(q), "invalid distance"));
            }
            row.push(GtRecord { id, dist });
        }
        if !is_sorted_records(&row) {
            return Err(Error::format(
                Location::Query(q),
                "records are not in non-decreasing (dist, id) order",
            ));
        }
        rows.push(row);
    }
    Ok(GroundTruth { k, rows })
}

/// Little-endian cursor that reports the byte offset of short reads.
pub(crate) struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub(crate) fn offset(&self) -> u64 {
        self.pos as u64
    }

    pub(crate) fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        if end > self.bytes.len() {
            return Err(Error::format(
                Location::Byte(self.bytes.len() as u64),
                format!("truncated input, needed {N} bytes at offset {}", self.pos),
            ));
        }
        let mut out = [0u8; N];
        out.copy_from_slice(&self.bytes[self.pos..end]);
        self.pos = end;
        Ok(out)
    }

    pub(crate) fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let got = self.take::<4>()?;
        if &got != expected {
            return Err(Error::format(
                Location::Byte(0),
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(&got),
                    String::from_utf8_lossy(expected)
                ),
            ));
        }
        Ok(())
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    pub(crate) fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_is_deterministic_and_in_range() {
        let a = gen_rvec(2, 1, 42).unwrap();
        let b = gen_rvec(2, 1, 42).unwrap();
        assert_eq!(a, b);
        let c = gen_rvec(8, 500, 1).unwrap();
        assert!(c.as_flat().iter().all(|x| (0.0..1.0).contains(x)));
        assert_ne!(gen_rvec(8, 10, 1).unwrap(), gen_rvec(8, 10, 2).unwrap());
        assert!(gen_rvec(0, 1, 0).is_err());
        assert!(gen_rvec(1, 0, 0).is_err());
    }

    #[test]
    fn uniform_moments() {
        let d = gen_rvec(16, 100_000, 2024).unwrap();
        let xs = d.as_flat();
        let n = xs.len() as f64;
        let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
        let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
        assert!((var - 1.0 / 12.0).abs() < 0.002, "var {var}");
    }

    #[test]
    fn dense_encoding_size_and_errors() {
        let d = DenseDataset::from_flat(3, vec![1.0, 2.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        encode_dense(&mut buf, &d).unwrap();
        assert_eq!(buf.len(), 28);
        assert_eq!(decode_dense(&buf).unwrap(), d);

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            decode_dense(&bad),
            Err(Error::Format { at: Location::Byte(0), .. })
        ));
        assert!(matches!(decode_dense(&buf[..27]), Err(Error::Format { .. })));
        let mut zero = buf.clone();
        zero[4..8].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(
            decode_dense(&zero),
            Err(Error::Format { at: Location::Byte(4), .. })
        ));
        assert!(decode_dense(b"RV").is_err());
    }

    #[test]
    fn strings_lines() {
        assert_eq!(decode_strings(b"a\nb\n").unwrap().len(), 2);
        assert_eq!(decode_strings(b"a\n\nb").unwrap().len(), 2);
        let d = decode_strings("héllo\r\nworld".as_bytes()).unwrap();
        assert_eq!(d.text(0), "héllo");
        match decode_strings(b"ok\n\xff\xfe\n") {
            Err(Error::Format { at, .. }) => assert_eq!(at, Location::Line(2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sparse_lines() {
        assert_eq!(
            parse_sparse_line("0:1.0 3:2.5", 1).unwrap().entries(),
            &[(0, 1.0), (3, 2.5)]
        );
        assert_eq!(
            parse_sparse_line("3:1.0 0:2.0", 1).unwrap().entries(),
            &[(0, 2.0), (3, 1.0)]
        );
        assert!(matches!(
            parse_sparse_line("0:1.0 0:2.0", 4),
            Err(Error::Format { at: Location::LineColumn(4, 7), .. })
        ));
        assert!(parse_sparse_line("0:-1", 1).is_err());
        assert!(parse_sparse_line("0:0", 1).is_err());
        assert!(parse_sparse_line("x:1", 1).is_err());
        assert!(parse_sparse_line("5", 1).is_err());
        assert!(matches!(
            parse_sparse_line("", 9),
            Err(Error::Format { at: Location::Line(9), .. })
        ));
    }

    #[test]
    fn gt_layout() {
        let gt = GroundTruth::new(1, vec![vec![GtRecord { id: 3, dist: 0.5 }]]).unwrap();
        let mut buf = Vec::new();
        encode_gt(&mut buf, &gt).unwrap();
        assert_eq!(buf.len(), 24);
        assert_eq!(decode_gt(&buf).unwrap(), gt);
    }

    #[test]
    fn gt_rejects_swapped_records() {
        let gt = GroundTruth::new(
            2,
            vec![
                vec![GtRecord { id: 0, dist: 0.1 }, GtRecord { id: 1, dist: 0.2 }],
                vec![GtRecord { id: 4, dist: 0.1 }, GtRecord { id: 2, dist: 0.3 }],
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        encode_gt(&mut buf, &gt).unwrap();
        // swap the two records of query 1
        let base = 16 + 16;
        let (a, b) = (buf[base..base + 8].to_vec(), buf[base + 8..base + 16].to_vec());
        buf[base..base + 8].copy_from_slice(&b);
        buf[base + 8..base + 16].copy_from_slice(&a);
        match decode_gt(&buf) {
            Err(Error::Format { at, .. }) => assert_eq!(at, Location::Query(1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gt_from_results_resorts_after_rounding() {
        let a = 1.0f64;
        let b = a + 1e-12; // same f32 value
        let gt = GroundTruth::from_results(
            2,
            vec![vec![ScoredId::new(a, 9), ScoredId::new(b, 2)]],
        )
        .unwrap();
        assert_eq!(gt.ids(0).collect::<Vec<_>>(), vec![2, 9]);
    }
}
