//! Incrementally built proximity graph.
//!
//! Item `j` is linked in both directions to the `N` neighbors that the
//! configured search algorithm finds among items `0..j`. While `j <= N` it is
//! simply linked to every earlier item. Reverse links are never pruned.

use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::data::{seeded_stream, ByteReader, Dataset};
use crate::error::{Error, Location, Result};
use crate::params::{SearchParams, Variant};
use crate::search::{search, GraphView, QueryContext, SearchResult};

pub const GRAPH_MAGIC: &[u8; 4] = b"APGX";
pub const GRAPH_VERSION: u32 = 1;

/// Stream id reserved for construction-time searches.
const BUILD_STREAM: u64 = u64::MAX;

pub struct SearchGraph<D: Dataset> {
    data: D,
    adjacency: Vec<Vec<u32>>,
    n_links: usize,
    params: SearchParams,
    build_ctx: QueryContext,
}

impl<D: Dataset> SearchGraph<D> {
    /// An empty graph over an empty dataset, ready for [`insert`](Self::insert).
    pub fn new(data: D, n_links: usize, params: SearchParams, seed: u64) -> Result<Self> {
        if !data.is_empty() {
            return Err(Error::usage("SearchGraph::new expects an empty dataset; use build"));
        }
        Self::unindexed(data, n_links, params, seed)
    }

    fn unindexed(data: D, n_links: usize, params: SearchParams, seed: u64) -> Result<Self> {
        if n_links == 0 {
            return Err(Error::usage("the number of links N must be at least 1"));
        }
        if data.len() > u32::MAX as usize {
            return Err(Error::usage("datasets are limited to 2^32 - 1 items"));
        }
        params.validate()?;
        Ok(Self {
            adjacency: Vec::with_capacity(data.len()),
            data,
            n_links,
            params,
            build_ctx: QueryContext::with_rng(seeded_stream(seed, BUILD_STREAM)),
        })
    }

    /// Indexes every item of `data` in order. The result is a pure function
    /// of the arguments.
    pub fn build(data: D, params: SearchParams, n_links: usize, seed: u64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::usage("cannot build a graph over an empty dataset"));
        }
        let mut graph = Self::unindexed(data, n_links, params, seed)?;
        while graph.adjacency.len() < graph.data.len() {
            graph.link_next()?;
        }
        Ok(graph)
    }

    /// Reassembles a graph from stored adjacency lists, checking every
    /// structural invariant.
    pub fn from_parts(
        data: D,
        adjacency: Vec<Vec<u32>>,
        n_links: usize,
        params: SearchParams,
        seed: u64,
    ) -> Result<Self> {
        if adjacency.len() != data.len() {
            return Err(Error::usage(format!(
                "graph has {} vertices but the dataset has {} items",
                adjacency.len(),
                data.len()
            )));
        }
        validate_adjacency(&adjacency)?;
        let mut graph = Self::unindexed(data, n_links, params, seed)?;
        graph.adjacency = adjacency;
        Ok(graph)
    }

    /// Appends `item` and links it; returns its id.
    pub fn insert(&mut self, item: &D::Item) -> Result<u32> {
        if self.data.len() >= u32::MAX as usize {
            return Err(Error::usage("datasets are limited to 2^32 - 1 items"));
        }
        self.data.push(item)?;
        self.link_next()
    }

    fn link_next(&mut self) -> Result<u32> {
        let id = self.adjacency.len();
        let new = id as u32;
        if id <= self.n_links {
            self.adjacency.push((0..new).collect());
            for u in 0..id {
                self.adjacency[u].push(new);
            }
            return Ok(new);
        }
        let view = GraphView::new(&self.data, &self.adjacency);
        let found = search(
            view,
            self.data.item(id),
            self.n_links,
            &self.params,
            &mut self.build_ctx,
        )?;
        let links: Vec<u32> = found.ids().collect();
        for &u in &links {
            self.adjacency[u as usize].push(new);
        }
        self.adjacency.push(links);
        Ok(new)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn data(&self) -> &D {
        &self.data
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    pub fn params(&self) -> &SearchParams {
        &self.params
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adjacency
    }

    /// Neighbors of `id` in the order the links were created.
    pub fn neighbors(&self, id: usize) -> Result<&[u32]> {
        self.adjacency.get(id).map(Vec::as_slice).ok_or_else(|| {
            Error::usage(format!("vertex {id} out of range (n = {})", self.len()))
        })
    }

    pub fn view(&self) -> GraphView<'_, D> {
        GraphView::new(&self.data, &self.adjacency)
    }

    /// Answers a query with the graph's own parameters.
    pub fn search(&self, q: &D::Item, k: usize, ctx: &mut QueryContext) -> Result<SearchResult> {
        search(self.view(), q, k, &self.params, ctx)
    }

    pub fn search_with(
        &self,
        q: &D::Item,
        k: usize,
        params: &SearchParams,
        ctx: &mut QueryContext,
    ) -> Result<SearchResult> {
        search(self.view(), q, k, params, ctx)
    }

    pub fn stats(&self) -> GraphStats {
        graph_stats(&self.adjacency)
    }

    pub fn into_data(self) -> D {
        self.data
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    pub n: usize,
    pub edges: usize,
    pub min_degree: usize,
    pub mean_degree: f64,
    pub max_degree: usize,
    pub connected: bool,
}

pub fn graph_stats(adjacency: &[Vec<u32>]) -> GraphStats {
    let n = adjacency.len();
    let degrees = adjacency.iter().map(Vec::len);
    let total: usize = degrees.clone().sum();
    GraphStats {
        n,
        edges: total / 2,
        min_degree: degrees.clone().min().unwrap_or(0),
        mean_degree: if n == 0 { 0.0 } else { total as f64 / n as f64 },
        max_degree: degrees.max().unwrap_or(0),
        connected: is_connected(adjacency),
    }
}

/// Breadth-first reachability from vertex 0. The empty graph counts as
/// connected.
pub fn is_connected(adjacency: &[Vec<u32>]) -> bool {
    let n = adjacency.len();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0u32]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u as usize] {
            if !seen[v as usize] {
                seen[v as usize] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    reached == n
}

/// Checks ranges, self-loops, duplicates and symmetry.
pub fn validate_adjacency(adjacency: &[Vec<u32>]) -> Result<()> {
    let n = adjacency.len();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (u, list) in adjacency.iter().enumerate() {
        let mut sorted = list.clone();
        sorted.sort_unstable();
        if let Some(&v) = sorted.iter().find(|&&v| v as usize >= n) {
            return Err(Error::usage(format!("vertex {u} links to {v}, beyond n = {n}")));
        }
        if sorted.binary_search(&(u as u32)).is_ok() {
            return Err(Error::usage(format!("vertex {u} links to itself")));
        }
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::usage(format!("vertex {u} has a repeated neighbor")));
        }
        edges.extend(sorted.iter().map(|&v| (u as u32, v)));
    }
    let mut reversed: Vec<(u32, u32)> = edges.iter().map(|&(u, v)| (v, u)).collect();
    reversed.sort_unstable();
    edges.sort_unstable();
    if edges != reversed {
        let missing = edges
            .iter()
            .find(|e| reversed.binary_search(e).is_err())
            .copied()
            .unwrap_or_default();
        return Err(Error::usage(format!(
            "adjacency is not symmetric near edge {} -> {}",
            missing.0, missing.1
        )));
    }
    Ok(())
}

/// Contents of a graph file. Items are not stored; the dataset file is the
/// companion.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFile {
    pub n_links: u32,
    pub variant: Variant,
    pub adjacency: Vec<Vec<u32>>,
}

impl GraphFile {
    pub fn of<D: Dataset>(graph: &SearchGraph<D>) -> Self {
        Self {
            n_links: graph.n_links as u32,
            variant: graph.params.variant,
            adjacency: graph.adjacency.clone(),
        }
    }
}

pub fn encode_graph(w: &mut impl Write, file: &GraphFile) -> Result<()> {
    w.write_all(GRAPH_MAGIC)?;
    w.write_all(&GRAPH_VERSION.to_le_bytes())?;
    w.write_all(&file.n_links.to_le_bytes())?;
    w.write_all(&[file.variant.code()])?;
    w.write_all(&(file.adjacency.len() as u64).to_le_bytes())?;
    for list in &file.adjacency {
        w.write_all(&(list.len() as u32).to_le_bytes())?;
        for v in list {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn write_graph<D: Dataset>(path: impl AsRef<Path>, graph: &SearchGraph<D>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    encode_graph(&mut w, &GraphFile::of(graph))?;
    w.flush()?;
    Ok(())
}

pub fn decode_graph(bytes: &[u8]) -> Result<GraphFile> {
    let mut r = ByteReader::new(bytes);
    r.magic(GRAPH_MAGIC)?;
    let at = r.offset();
    let version = r.u32()?;
    if version != GRAPH_VERSION {
        return Err(Error::format(
            Location::Byte(at),
            format!("unsupported graph version {version}"),
        ));
    }
    let n_links = r.u32()?;
    let at = r.offset();
    let variant = Variant::from_code(r.u8()?)
        .ok_or_else(|| Error::format(Location::Byte(at), "unknown variant code"))?;
    let n = r.u64()?;
    if n > u32::MAX as u64 {
        return Err(Error::format(Location::Byte(at + 1), "too many vertices"));
    }
    let mut adjacency = Vec::with_capacity((n as usize).min(r.remaining() / 4));
    for _ in 0..n {
        let degree = r.u32()? as usize;
        let at = r.offset();
        if degree * 4 > r.remaining() {
            return Err(Error::format(Location::Byte(at), "truncated neighbor list"));
        }
        let mut list = Vec::with_capacity(degree);
        for _ in 0..degree {
            list.push(r.u32()?);
        }
        adjacency.push(list);
    }
    if r.remaining() != 0 {
        return Err(Error::format(Location::Byte(r.offset()), "trailing bytes"));
    }
    validate_adjacency(&adjacency).map_err(|e| Error::format(Location::Byte(0), e.to_string()))?;
    Ok(GraphFile {
        n_links,
        variant,
        adjacency,
    })
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<GraphFile> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_graph(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_rvec, DenseDataset};
    use crate::eval::exact_knn;

    fn dense(n: usize, dim: usize, seed: u64) -> DenseDataset {
        gen_rvec(dim, n, seed).unwrap()
    }

    #[test]
    fn first_insertions() {
        let mut g =
            SearchGraph::new(DenseDataset::new(2).unwrap(), 8, SearchParams::apg_star(), 1)
                .unwrap();
        assert_eq!(g.insert(&[0.0, 0.0]).unwrap(), 0);
        assert!(g.neighbors(0).unwrap().is_empty());
        assert_eq!(g.insert(&[1.0, 0.0]).unwrap(), 1);
        assert_eq!(g.neighbors(0).unwrap(), &[1]);
        assert_eq!(g.neighbors(1).unwrap(), &[0]);
        assert!(g.neighbors(2).is_err());
        assert!(g.insert(&[1.0]).is_err());
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn ninth_insertion_links_to_exact_neighbors() {
        // With 9 existing items and N = 8 the prefix graph is complete, so
        // one expansion reaches every vertex.
        let data = dense(10, 4, 3);
        for params in [
            SearchParams::apg(1),
            SearchParams::apg_star(),
            SearchParams::apg_star_r(),
            SearchParams::beam(2),
        ] {
            let g = SearchGraph::build(data.clone(), params, 8, 7).unwrap();
            let prefix = DenseDataset::from_flat(4, data.as_flat()[..9 * 4].to_vec()).unwrap();
            let exact: Vec<u32> = exact_knn(&prefix, data.item(9), 8)
                .unwrap()
                .iter()
                .map(|p| p.id)
                .collect();
            let mut links = g.neighbors(9).unwrap().to_vec();
            links.sort_unstable();
            let mut expected = exact.clone();
            expected.sort_unstable();
            assert_eq!(links, expected, "{params:?}");
            for &u in &links {
                assert!(g.neighbors(u as usize).unwrap().contains(&9));
            }
        }
    }

    #[test]
    fn small_builds_are_complete() {
        let g = SearchGraph::build(dense(1, 3, 0), SearchParams::apg_star(), 16, 0).unwrap();
        let s = g.stats();
        assert_eq!((s.n, s.max_degree, s.connected), (1, 0, true));

        let g = SearchGraph::build(dense(2, 3, 0), SearchParams::apg_star(), 16, 0).unwrap();
        assert_eq!(g.stats().mean_degree, 1.0);

        let g = SearchGraph::build(dense(10, 3, 0), SearchParams::beam(4), 16, 0).unwrap();
        for u in 0..10 {
            assert_eq!(g.neighbors(u).unwrap().len(), 9);
        }
        assert!(SearchGraph::build(DenseDataset::new(3).unwrap(), SearchParams::apg_star(), 16, 0)
            .is_err());
    }

    #[test]
    fn thousand_points() {
        let g = SearchGraph::build(dense(1000, 8, 5), SearchParams::apg_star(), 16, 5).unwrap();
        let s = g.stats();
        assert!(s.connected);
        assert!(s.mean_degree >= 16.0, "{s:?}");
        assert!(s.mean_degree <= 32.0, "{s:?}");
        validate_adjacency(g.adjacency()).unwrap();
    }

    #[test]
    fn validation_catches_defects() {
        assert!(validate_adjacency(&[vec![1], vec![]]).is_err());
        assert!(validate_adjacency(&[vec![0]]).is_err());
        assert!(validate_adjacency(&[vec![1, 1], vec![0, 0]]).is_err());
        assert!(validate_adjacency(&[vec![5]]).is_err());
        assert!(validate_adjacency(&[vec![1], vec![0]]).is_ok());
    }

    #[test]
    fn graph_file_layout() {
        let g = SearchGraph::build(dense(3, 2, 0), SearchParams::beam(2), 4, 0).unwrap();
        let mut buf = Vec::new();
        encode_graph(&mut buf, &GraphFile::of(&g)).unwrap();
        // header 4+4+4+1+8, then 3 vertices of degree 2
        assert_eq!(buf.len(), 21 + 3 * (4 + 8));
        assert_eq!(&buf[..4], b"APGX");
        assert_eq!(buf[12], Variant::Beam.code());
        let file = decode_graph(&buf).unwrap();
        assert_eq!(file, GraphFile::of(&g));

        let mut bad = buf.clone();
        bad[4] = 2;
        assert!(decode_graph(&bad).is_err());
        assert!(decode_graph(&buf[..buf.len() - 1]).is_err());
        let mut asym = buf.clone();
        // point vertex 0's first neighbor at itself
        asym[25..29].copy_from_slice(&0u32.to_le_bytes());
        assert!(decode_graph(&asym).is_err());
    }

    #[test]
    fn from_parts_round_trip() {
        let data = dense(50, 4, 1);
        let g = SearchGraph::build(data.clone(), SearchParams::apg_star(), 4, 1).unwrap();
        let again = SearchGraph::from_parts(
            data.clone(),
            g.adjacency().to_vec(),
            4,
            SearchParams::apg_star(),
            1,
        )
        .unwrap();
        assert_eq!(again.adjacency(), g.adjacency());
        assert!(SearchGraph::from_parts(data, vec![vec![]], 4, SearchParams::apg_star(), 1).is_err());
    }
}
