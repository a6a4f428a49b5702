//! Approximate distance oracles from iterated hierarchical partitions.
//!
//! Level `i` samples a hierarchy over the surviving set `X_i`, removes its
//! padded points `Y_i`, and keeps the hierarchy as an ultrametric tree. A
//! query for `(x, y)` reads the tree at the level where the first of the two
//! was removed; that endpoint is padded there, which bounds the stretch by
//! `8/β`.

use crate::error::{Error, Result};
use crate::graph::{DistanceMatrix, Edge, VertexId, WeightedGraph};
use crate::hierarchy::{hierarchy_to_ultrametric, padded_points, sample_hierarchy_in, Multiscale};
use crate::rng::substream;
use crate::spanner::baswana_sen;
use crate::ultrametric::UltrametricTree;

/// Consecutive draws with no padded point before a build gives up.
pub const MAX_EMPTY_DRAWS: u64 = 32;

/// Spanner parameter for dense inputs: stretch `2·3−1 = 5`.
pub const DENSE_SPANNER_K: usize = 3;

const MAGIC: &[u8; 8] = b"CKRORACL";
const VERSION: u32 = 1;

pub fn default_beta(k: usize) -> f64 {
    1.0 / (32.0 * k as f64)
}

#[derive(Clone, Debug)]
pub struct DistanceOracle {
    n: usize,
    k: usize,
    beta: f64,
    seed: u64,
    levels: Vec<UltrametricTree>,
    home: Vec<u32>,
    // leaf node of x in levels 0..=home(x) at offsets[x]..offsets[x+1]
    offsets: Vec<usize>,
    handles: Vec<u32>,
}

/// Builds an oracle with `β = 1/(32k)`.
pub fn build_oracle(g: &WeightedGraph, k: usize, seed: u64) -> Result<DistanceOracle> {
    build_oracle_with_beta(g, k, default_beta(k), seed)
}

pub fn build_oracle_with_beta(g: &WeightedGraph, k: usize, beta: f64, seed: u64) -> Result<DistanceOracle> {
    if k == 0 {
        return Err(Error::invalid("oracle parameter k must be at least 1"));
    }
    if !(beta > 0.0 && beta < 0.125) {
        return Err(Error::invalid(format!("padding parameter must lie in (0, 1/8), got {beta}")));
    }
    let n = g.n();
    if n == 0 {
        return Err(Error::invalid("graph has no vertices"));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if n >= u32::MAX as usize {
        return Err(Error::invalid("graph too large"));
    }
    let ms = Multiscale::new(g);
    let mut survivors: Vec<VertexId> = (0..n).collect();
    let mut home = vec![u32::MAX; n];
    let mut levels = Vec::new();
    while !survivors.is_empty() {
        let i = levels.len() as u64;
        let mut found = None;
        for attempt in 0..MAX_EMPTY_DRAWS {
            let mut rng = substream(seed, "oracle.level", &[i, attempt]);
            let sampled = sample_hierarchy_in(&ms, &survivors, &mut rng)?;
            let padded = padded_points(&ms, &sampled.partitions, beta, &survivors)?;
            if !padded.is_empty() {
                found = Some((sampled.tree, padded));
                break;
            }
        }
        let (tree, padded) = found.ok_or(Error::Stalled {
            level: i as usize,
            attempts: MAX_EMPTY_DRAWS as usize,
            seed,
        })?;
        for &x in &padded.points {
            home[x] = i as u32;
        }
        survivors.retain(|&x| !padded.contains(x));
        levels.push(hierarchy_to_ultrametric(&tree));
    }
    DistanceOracle::assemble(n, k, beta, seed, levels, home)
}

/// Builds an oracle for a metric given as a full matrix by first reducing
/// the complete graph to a 5-spanner.
pub fn oracle_from_matrix(dist: &DistanceMatrix, k: usize, seed: u64) -> Result<DistanceOracle> {
    dist.validate_metric()?;
    let n = dist.n();
    let edges: Vec<Edge> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .map(|(u, v)| Edge { u, v, w: dist.get(u, v) })
        .collect();
    let complete = WeightedGraph::from_normalized(n, edges);
    let spanner = baswana_sen(&complete, DENSE_SPANNER_K, &mut substream(seed, "oracle.spanner", &[]))?;
    build_oracle(&spanner.to_graph(n), k, seed)
}

impl DistanceOracle {
    fn assemble(n: usize, k: usize, beta: f64, seed: u64, levels: Vec<UltrametricTree>, home: Vec<u32>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut handles = Vec::new();
        offsets.push(0);
        for (x, &h) in home.iter().enumerate() {
            if h as usize >= levels.len() {
                return Err(Error::Invariant(format!("vertex {x} was never removed")));
            }
            for (i, level) in levels.iter().enumerate() {
                let leaf = level.leaf(x);
                if leaf.is_some() != (i <= h as usize) {
                    return Err(Error::Invariant(format!("vertex {x} must appear exactly in levels 0..={h}")));
                }
                if let Some(leaf) = leaf {
                    handles.push(leaf as u32);
                }
            }
            offsets.push(handles.len());
        }
        Ok(DistanceOracle { n, k, beta, seed, levels, home, offsets, handles })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn levels(&self) -> &[UltrametricTree] {
        &self.levels
    }

    pub fn home(&self, x: VertexId) -> Option<usize> {
        self.home.get(x).map(|&h| h as usize)
    }

    /// Guaranteed stretch `8/β`.
    pub fn stretch_bound(&self) -> f64 {
        8.0 / self.beta
    }

    /// Total tree nodes over all levels.
    pub fn total_nodes(&self) -> usize {
        self.levels.iter().map(UltrametricTree::num_nodes).sum()
    }

    pub fn query(&self, x: VertexId, y: VertexId) -> Result<f64> {
        if x >= self.n {
            return Err(Error::UnknownPoint(x));
        }
        if y >= self.n {
            return Err(Error::UnknownPoint(y));
        }
        let level = self.home[x].min(self.home[y]) as usize;
        let a = self.handles[self.offsets[x] + level] as usize;
        let b = self.handles[self.offsets[y] + level] as usize;
        Ok(self.levels[level].node_distance(a, b))
    }

    /// Versioned little-endian snapshot.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend_from_slice(&(self.k as u32).to_le_bytes());
        out.extend_from_slice(&self.beta.to_bits().to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&(self.levels.len() as u32).to_le_bytes());
        for t in &self.levels {
            out.extend_from_slice(&(t.num_nodes() as u32).to_le_bytes());
            for u in 0..t.num_nodes() {
                let p = t.parent(u).map_or(u32::MAX, |p| p as u32);
                out.extend_from_slice(&p.to_le_bytes());
            }
            for u in 0..t.num_nodes() {
                out.extend_from_slice(&t.gamma(u).to_bits().to_le_bytes());
            }
            out.extend_from_slice(&(t.num_leaves() as u32).to_le_bytes());
            for (x, leaf) in t.leaf_pairs() {
                out.extend_from_slice(&(x as u32).to_le_bytes());
                out.extend_from_slice(&(leaf as u32).to_le_bytes());
            }
        }
        for &h in &self.home {
            out.extend_from_slice(&h.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Decode("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Decode(format!("unsupported version {version}")));
        }
        let n = usize::try_from(r.u64()?).map_err(|_| Error::Decode("vertex count too large".into()))?;
        let k = r.u32()? as usize;
        let beta = f64::from_bits(r.u64()?);
        let seed = r.u64()?;
        let count = r.u32()? as usize;
        if n == 0 || k == 0 || !(beta > 0.0 && beta < 0.125) {
            return Err(Error::Decode("invalid header".into()));
        }
        // every level holds at least one node (12 bytes)
        r.need(count.saturating_mul(12))?;
        let mut levels = Vec::with_capacity(count);
        for _ in 0..count {
            let nodes = r.u32()? as usize;
            r.need(nodes.saturating_mul(12))?;
            let parent: Vec<Option<usize>> = (0..nodes)
                .map(|_| r.u32().map(|p| (p != u32::MAX).then_some(p as usize)))
                .collect::<Result<_>>()?;
            let gamma: Vec<f64> = (0..nodes).map(|_| r.u64().map(f64::from_bits)).collect::<Result<_>>()?;
            let leaves = r.u32()? as usize;
            r.need(leaves.saturating_mul(8))?;
            let pairs: Vec<(usize, usize)> = (0..leaves)
                .map(|_| Ok((r.u32()? as usize, r.u32()? as usize)))
                .collect::<Result<_>>()?;
            if pairs.iter().any(|&(x, _)| x >= n) {
                return Err(Error::Decode("leaf point out of range".into()));
            }
            // the encoder writes leaves sorted by point; anything else is not canonical
            if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::Decode("leaf table not sorted by point".into()));
            }
            let tree = UltrametricTree::new(parent, gamma, pairs).map_err(|e| Error::Decode(e.to_string()))?;
            levels.push(tree);
        }
        r.need(n.saturating_mul(4))?;
        let home: Vec<u32> = (0..n).map(|_| r.u32()).collect::<Result<_>>()?;
        if r.pos != bytes.len() {
            return Err(Error::Decode("trailing bytes".into()));
        }
        Self::assemble(n, k, beta, seed, levels, home).map_err(|e| Error::Decode(e.to_string()))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn need(&self, len: usize) -> Result<()> {
        if self.bytes.len() - self.pos < len {
            return Err(Error::Decode("unexpected end of snapshot".into()));
        }
        Ok(())
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        self.need(len)?;
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
