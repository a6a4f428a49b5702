//! Undirected positively weighted graphs, the edge-list text format, and
//! Dijkstra shortest paths.
//!
//! Edge-list format:
//!
//! ```text
//! # comment lines start with '#'
//! 3          <- vertex count
//! 0 1 1.0    <- "u v w", 0-based ids, positive weight
//! 1 2 2.5
//! ```

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type VertexId = usize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub w: f64,
}

/// An undirected graph with strictly positive edge weights.
///
/// Self-loops are dropped and parallel edges collapse to the lightest one on
/// construction, so `edges()` holds each unordered pair at most once with
/// `u < v`, sorted by `(u, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    adjacency: Vec<(VertexId, f64)>,
}

impl WeightedGraph {
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut raw = Vec::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) has non-positive or non-finite weight {w}"
                )));
            }
            if u != v {
                raw.push(Edge { u: u.min(v), v: u.max(v), w });
            }
        }
        Ok(Self::from_normalized(n, raw))
    }

    /// Builds from edges already checked for range and weight. Self-loops are
    /// expected to be gone; orientation and duplicates are fixed here.
    pub(crate) fn from_normalized(n: usize, mut edges: Vec<Edge>) -> Self {
        for e in &mut edges {
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
            }
        }
        edges.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)).then(a.w.total_cmp(&b.w)));
        edges.dedup_by(|later, kept| later.u == kept.u && later.v == kept.v);

        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for d in &degree[..n] {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0, 0.0); acc];
        for e in &edges {
            adjacency[fill[e.u]] = (e.v, e.w);
            fill[e.u] += 1;
            adjacency[fill[e.v]] = (e.u, e.w);
            fill[e.v] += 1;
        }
        WeightedGraph { n, edges, offsets, adjacency }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, f64)] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.w).min_by(f64::total_cmp)
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.w).max_by(f64::total_cmp)
    }

    /// Connected-component label per vertex, labels numbered in order of
    /// their smallest vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(v, _) in self.neighbors(u) {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// True for graphs with at most one vertex, too.
    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Renders the graph in the edge-list text format.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.w);
        }
        out
    }
}

/// Parses the edge-list text format. Errors carry the 1-based line number.
pub fn parse_edge_list(text: &str) -> Result<WeightedGraph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        match n {
            None => {
                let count = fields.next().unwrap_or_default();
                let count: usize = count
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("expected vertex count, got {count:?}")))?;
                if fields.next().is_some() {
                    return Err(Error::parse(line_no, "vertex count line has extra fields"));
                }
                n = Some(count);
            }
            Some(count) => {
                let (Some(u), Some(v), Some(w), None) =
                    (fields.next(), fields.next(), fields.next(), fields.next())
                else {
                    return Err(Error::parse(line_no, "expected \"u v w\""));
                };
                let u: usize = u
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad vertex id {u:?}")))?;
                let v: usize = v
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad vertex id {v:?}")))?;
                let w: f64 = w
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad weight {w:?}")))?;
                if u >= count || v >= count {
                    return Err(Error::parse(
                        line_no,
                        format!("vertex id out of range 0..{count}"),
                    ));
                }
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::parse(line_no, format!("weight must be positive, got {w}")));
                }
                if u != v {
                    edges.push(Edge { u, v, w });
                }
            }
        }
    }
    let n = n.ok_or_else(|| Error::parse(text.lines().count().max(1), "missing vertex count"))?;
    Ok(WeightedGraph::from_normalized(n, edges))
}

pub fn load_graph(path: impl AsRef<std::path::Path>) -> Result<WeightedGraph> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

/// Min-heap entry ordered by key, then by vertex id.
#[derive(Clone, Copy, Debug)]
pub(crate) struct MinEntry {
    pub key: f64,
    pub vertex: VertexId,
}

impl PartialEq for MinEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MinEntry {}

impl PartialOrd for MinEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MinEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// Shortest-path distances from a source set. Unreached vertices hold
/// `f64::INFINITY`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMap {
    dist: Vec<f64>,
}

impl DistanceMap {
    pub fn get(&self, v: VertexId) -> Option<f64> {
        let d = self.dist[v];
        d.is_finite().then_some(d)
    }

    pub fn is_reached(&self, v: VertexId) -> bool {
        self.dist[v].is_finite()
    }

    /// Raw distances, `f64::INFINITY` marking unreached vertices.
    pub fn as_slice(&self) -> &[f64] {
        &self.dist
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.dist
    }
}

/// Dijkstra from `source`. With a radius, only vertices at distance at most
/// `radius` are guaranteed to be reached; the rest are left unreached.
pub fn dijkstra(g: &WeightedGraph, source: VertexId, radius: Option<f64>) -> DistanceMap {
    assert!(source < g.n(), "source {source} out of range");
    dijkstra_multi(g, &[(source, 0.0)], radius)
}

/// Dijkstra from several sources, each with an initial offset. Equivalent to
/// running from a virtual vertex joined to each seed by an edge of the given
/// weight.
pub fn dijkstra_multi(
    g: &WeightedGraph,
    seeds: &[(VertexId, f64)],
    radius: Option<f64>,
) -> DistanceMap {
    let limit = radius.unwrap_or(f64::INFINITY);
    assert!(limit >= 0.0, "radius must be non-negative");
    let mut dist = vec![f64::INFINITY; g.n()];
    let mut done = vec![false; g.n()];
    let mut heap = BinaryHeap::new();
    for &(s, d0) in seeds {
        if d0 <= limit && d0 < dist[s] {
            dist[s] = d0;
            heap.push(MinEntry { key: d0, vertex: s });
        }
    }
    while let Some(MinEntry { key, vertex: u }) = heap.pop() {
        if done[u] || key > dist[u] {
            continue;
        }
        done[u] = true;
        for &(v, w) in g.neighbors(u) {
            let cand = key + w;
            if cand < dist[v] && cand <= limit {
                dist[v] = cand;
                heap.push(MinEntry { key: cand, vertex: v });
            }
        }
    }
    DistanceMap { dist }
}

/// A dense symmetric distance matrix. Unreachable pairs hold `f64::INFINITY`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds from rows without validation.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            data.extend(row);
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DistanceMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: VertexId, v: VertexId) -> f64 {
        self.data[u * self.n + v]
    }

    pub fn row(&self, u: VertexId) -> &[f64] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    /// Checks that the matrix is a metric with positive off-diagonal
    /// entries: finite, symmetric, zero diagonal, triangle inequality. The
    /// error names the first violating pair or triple.
    pub fn validate_metric(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::NotMetric(format!("d({i},{i}) = {} is not zero", self.get(i, i))));
            }
            for j in (i + 1)..n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if a != b {
                    return Err(Error::NotMetric(format!("asymmetric pair ({i},{j}): {a} vs {b}")));
                }
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::NotMetric(format!(
                        "d({i},{j}) = {a} is not a positive finite distance"
                    )));
                }
            }
        }
        for i in 0..n {
            let ri = self.row(i);
            for j in 0..n {
                let dij = ri[j];
                let rj = self.row(j);
                for k in 0..n {
                    if ri[k] > dij + rj[k] {
                        return Err(Error::NotMetric(format!(
                            "triangle inequality fails on ({i},{j},{k}): d({i},{k}) = {} > {} + {}",
                            ri[k], dij, rj[k]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// All-pairs shortest-path distances, one Dijkstra per vertex.
pub fn exact_metric(g: &WeightedGraph) -> DistanceMatrix {
    let n = g.n();
    let mut data = Vec::with_capacity(n * n);
    for s in 0..n {
        data.extend(dijkstra(g, s, None).into_vec());
    }
    DistanceMatrix { n, data }
}
