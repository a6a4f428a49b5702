//! Δ-bounded CKR partitions.
//!
//! A CKR partition is fixed by a permutation `π` of the points and a radius
//! `R ∈ [Δ/4, Δ/2]`: every point joins the first center, in permutation
//! order, within distance `R`. [`ckr_partition_metric`] evaluates that rule
//! directly on a distance matrix in `O(n²)`. [`ckr_partition_graph`] samples
//! the same distribution on a sparse graph with one Dijkstra-like sweep per
//! center whose tentative distances carry over between centers, so a vertex
//! is only touched when the current center is the closest one seen so far.

use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{DistanceMatrix, MinEntry, VertexId, WeightedGraph};

/// A partition of `0..n` into CKR blocks.
///
/// `block(v)` is the 1-based rank `i` of the capturing center `π(i)`. Ranks
/// are not compacted, so block ids range over `1..=n` with gaps.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    block: Vec<u32>,
    centers: Vec<VertexId>,
    radius: f64,
    delta: f64,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block.is_empty()
    }

    pub fn block(&self, v: VertexId) -> u32 {
        self.block[v]
    }

    pub fn blocks(&self) -> &[u32] {
        &self.block
    }

    /// The permutation `π`, `centers()[i - 1] = π(i)`.
    pub fn centers(&self) -> &[VertexId] {
        &self.centers
    }

    pub fn center_of(&self, v: VertexId) -> VertexId {
        self.centers[self.block[v] as usize - 1]
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn same_block(&self, u: VertexId, v: VertexId) -> bool {
        self.block[u] == self.block[v]
    }

    pub fn num_blocks(&self) -> usize {
        let mut ranks = self.block.clone();
        ranks.sort_unstable();
        ranks.dedup();
        ranks.len()
    }

    /// Members of each nonempty block, blocks ordered by rank.
    pub fn members(&self) -> Vec<Vec<VertexId>> {
        let mut by_rank: Vec<Vec<VertexId>> = vec![Vec::new(); self.block.len() + 1];
        for (v, &b) in self.block.iter().enumerate() {
            by_rank[b as usize].push(v);
        }
        by_rank.into_iter().filter(|b| !b.is_empty()).collect()
    }

    /// Text form: header `delta R seed`, then one `v block_rank` line per vertex.
    pub fn to_text(&self, seed: u64) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.delta, self.radius, seed);
        for (v, b) in self.block.iter().enumerate() {
            let _ = writeln!(out, "{v} {b}");
        }
        out
    }
}

/// Work counters and the residual tentative distances of the graph sampler.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SamplerTrace {
    /// Edge relaxation steps, one per incident edge of every visited vertex.
    pub relaxations: u64,
    /// Queue insertions, counting each center as inserted when its sweep starts.
    pub queue_inserts: u64,
    /// `min_j ρ(π(j), v)` when that minimum is at most `R`, else infinity.
    pub final_delta: Vec<f64>,
}

fn check_scale(delta: f64, radius: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("scale must be positive and finite, got {delta}")));
    }
    if !(radius >= delta / 4.0 && radius <= delta / 2.0) {
        return Err(Error::invalid(format!(
            "radius {radius} outside [{}, {}]",
            delta / 4.0,
            delta / 2.0
        )));
    }
    Ok(())
}

fn check_permutation(pi: &[VertexId], n: usize) -> Result<()> {
    if pi.len() != n {
        return Err(Error::invalid(format!("permutation has {} entries, expected {n}", pi.len())));
    }
    let mut seen = vec![false; n];
    for &v in pi {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::invalid(format!("not a permutation of 0..{n}: bad entry {v}")));
        }
    }
    Ok(())
}

/// Reference evaluation of the CKR rule on a full distance matrix.
pub fn ckr_partition_metric(
    dist: &DistanceMatrix,
    delta: f64,
    pi: &[VertexId],
    radius: f64,
) -> Result<Partition> {
    let n = dist.n();
    check_scale(delta, radius)?;
    check_permutation(pi, n)?;
    let mut block = vec![0u32; n];
    for (i, &c) in pi.iter().enumerate() {
        let row = dist.row(c);
        for v in 0..n {
            if block[v] == 0 && row[v] <= radius {
                block[v] = i as u32 + 1;
            }
        }
    }
    if let Some(v) = block.iter().position(|&b| b == 0) {
        return Err(Error::Invariant(format!("vertex {v} not captured by any center")));
    }
    Ok(Partition { block, centers: pi.to_vec(), radius, delta })
}

/// Samples a Δ-bounded CKR partition of the shortest-path metric of `g`:
/// `π` by a uniform shuffle, then `R` uniform in `[Δ/4, Δ/2]`.
pub fn ckr_partition_graph<R: Rng + ?Sized>(
    g: &WeightedGraph,
    delta: f64,
    rng: &mut R,
) -> Result<(Partition, SamplerTrace)> {
    ckr_partition_graph_prioritized(g, delta, |_| true, rng)
}

/// Like [`ckr_partition_graph`], but vertices for which `first` holds are
/// placed before all others in `π`, each group uniformly shuffled.
///
/// Restricted to the `first` vertices this is a CKR partition of that subset
/// with centers drawn from the subset only; the remaining vertices are still
/// assigned to blocks.
pub fn ckr_partition_graph_prioritized<R, F>(
    g: &WeightedGraph,
    delta: f64,
    first: F,
    rng: &mut R,
) -> Result<(Partition, SamplerTrace)>
where
    R: Rng + ?Sized,
    F: Fn(VertexId) -> bool,
{
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("scale must be positive and finite, got {delta}")));
    }
    let (mut head, mut tail): (Vec<VertexId>, Vec<VertexId>) = (0..g.n()).partition(|&v| first(v));
    head.shuffle(rng);
    tail.shuffle(rng);
    head.extend(tail);
    let radius = rng.gen_range(delta / 4.0..=delta / 2.0);
    Ok(sweep(g, head, radius, delta))
}

/// The graph sampler with a caller-supplied `π` and `R`.
pub fn ckr_partition_graph_with(
    g: &WeightedGraph,
    delta: f64,
    pi: &[VertexId],
    radius: f64,
) -> Result<(Partition, SamplerTrace)> {
    check_scale(delta, radius)?;
    check_permutation(pi, g.n())?;
    Ok(sweep(g, pi.to_vec(), radius, delta))
}

fn sweep(g: &WeightedGraph, pi: Vec<VertexId>, radius: f64, delta: f64) -> (Partition, SamplerTrace) {
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut block = vec![0u32; n];
    let mut queued = vec![false; n];
    let mut heap: BinaryHeap<MinEntry> = BinaryHeap::new();
    let mut trace = SamplerTrace::default();

    for (i, &center) in pi.iter().enumerate() {
        let rank = i as u32 + 1;
        dist[center] = 0.0;
        trace.queue_inserts += 1;
        let mut w = center;
        loop {
            if block[w] == 0 {
                block[w] = rank;
            }
            let dw = dist[w];
            for &(u, weight) in g.neighbors(w) {
                trace.relaxations += 1;
                let cand = dw + weight;
                // Tentative values above R can never capture a vertex, so they
                // are not recorded; this keeps `dist` equal to the capped
                // minimum over all centers seen so far.
                if cand < dist[u] && cand <= radius {
                    dist[u] = cand;
                    if !queued[u] {
                        queued[u] = true;
                        trace.queue_inserts += 1;
                    }
                    heap.push(MinEntry { key: cand, vertex: u });
                }
            }
            let next = loop {
                match heap.pop() {
                    None => break None,
                    Some(e) if queued[e.vertex] && e.key == dist[e.vertex] => break Some(e.vertex),
                    Some(_) => {}
                }
            };
            match next {
                Some(u) => {
                    queued[u] = false;
                    if dist[u] > radius {
                        break;
                    }
                    w = u;
                }
                None => break,
            }
        }
        debug_assert!(heap.is_empty());
    }

    trace.final_delta = dist;
    (Partition { block, centers: pi, radius, delta }, trace)
}

/// A partition file as written by [`Partition::to_text`].
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionRecord {
    pub delta: f64,
    pub radius: f64,
    pub seed: u64,
    pub blocks: Vec<u32>,
}

/// Parses the partition text format. Vertex lines may come in any order but
/// must cover `0..n` exactly once; ranks must lie in `1..=n`.
pub fn parse_partition(text: &str) -> Result<PartitionRecord> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [d, r, s] = fields[..] else {
        return Err(Error::parse(hline, "header must be \"delta R seed\""));
    };
    let delta: f64 = d.parse().map_err(|_| Error::parse(hline, format!("bad delta {d:?}")))?;
    let radius: f64 = r.parse().map_err(|_| Error::parse(hline, format!("bad radius {r:?}")))?;
    let seed: u64 = s.parse().map_err(|_| Error::parse(hline, format!("bad seed {s:?}")))?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::parse(hline, "delta must be positive"));
    }
    if !(radius >= delta / 4.0 && radius <= delta / 2.0) {
        return Err(Error::parse(hline, "radius outside [delta/4, delta/2]"));
    }
    let mut entries = Vec::new();
    for (line, body) in lines {
        let mut it = body.split_whitespace();
        let (Some(v), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(line, "expected \"v block_rank\""));
        };
        let v: usize = v.parse().map_err(|_| Error::parse(line, format!("bad vertex {v:?}")))?;
        let b: u32 = b.parse().map_err(|_| Error::parse(line, format!("bad block rank {b:?}")))?;
        entries.push((line, v, b));
    }
    let n = entries.len();
    let mut blocks = vec![0u32; n];
    for (line, v, b) in entries {
        if v >= n {
            return Err(Error::parse(line, format!("vertex {v} out of range 0..{n}")));
        }
        if b == 0 || b as usize > n {
            return Err(Error::parse(line, format!("block rank {b} out of range 1..={n}")));
        }
        if blocks[v] != 0 {
            return Err(Error::parse(line, format!("vertex {v} listed twice")));
        }
        blocks[v] = b;
    }
    Ok(PartitionRecord { delta, radius, seed, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::exact_metric;
    use crate::rng;

    fn path3() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn cycle(n: usize) -> WeightedGraph {
        WeightedGraph::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0))).unwrap()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn metric_reference_examples() {
        let d = exact_metric(&path3());
        for r in [2.0, 3.0, 4.0] {
            for pi in permutations(3) {
                let p = ckr_partition_metric(&d, 8.0, &pi, r).unwrap();
                assert_eq!(p.num_blocks(), 1);
            }
        }
        let p = ckr_partition_metric(&d, 4.0, &[0, 1, 2], 1.5).unwrap();
        assert_eq!(p.blocks(), &[1, 1, 2]);

        let single = exact_metric(&WeightedGraph::new(1, []).unwrap());
        assert_eq!(ckr_partition_metric(&single, 1.0, &[0], 0.25).unwrap().blocks(), &[1]);
    }

    #[test]
    fn graph_sampler_examples() {
        let (p, _) = ckr_partition_graph_with(&path3(), 4.0, &[0, 1, 2], 1.5).unwrap();
        assert_eq!(p.blocks(), &[1, 1, 2]);

        let star = WeightedGraph::new(5, (1..5).map(|i| (0, i, 1.0))).unwrap();
        let (p, _) = ckr_partition_graph_with(&star, 4.0, &[0, 3, 1, 4, 2], 1.0).unwrap();
        assert_eq!(p.num_blocks(), 1);

        for seed in 0..20 {
            let (p, _) = ckr_partition_graph(&path3(), 8.0, &mut rng::master(seed)).unwrap();
            assert_eq!(p.num_blocks(), 1);
        }
    }

    #[test]
    fn exhaustive_cycle6_matches_reference() {
        let g = cycle(6);
        let d = exact_metric(&g);
        for pi in permutations(6) {
            for r in [1.0, 1.5, 2.0] {
                let (fast, trace) = ckr_partition_graph_with(&g, 4.0, &pi, r).unwrap();
                let slow = ckr_partition_metric(&d, 4.0, &pi, r).unwrap();
                assert_eq!(fast.blocks(), slow.blocks(), "pi={pi:?} r={r}");
                for v in 0..6 {
                    let m = pi.iter().map(|&c| d.get(c, v)).fold(f64::INFINITY, f64::min);
                    let expect = if m <= r { m } else { f64::INFINITY };
                    assert_eq!(trace.final_delta[v], expect);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = path3();
        assert!(ckr_partition_graph_with(&g, 4.0, &[0, 1, 2], 2.5).is_err());
        assert!(ckr_partition_graph_with(&g, 4.0, &[0, 1, 2], 0.5).is_err());
        assert!(ckr_partition_graph_with(&g, 4.0, &[0, 1, 1], 1.5).is_err());
        assert!(ckr_partition_graph_with(&g, 4.0, &[0, 1], 1.5).is_err());
        assert!(ckr_partition_graph(&g, 0.0, &mut rng::master(0)).is_err());
    }

    #[test]
    fn seeded_runs_are_identical() {
        let g = cycle(40);
        let a = ckr_partition_graph(&g, 6.0, &mut rng::master(11)).unwrap();
        let b = ckr_partition_graph(&g, 6.0, &mut rng::master(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn disconnected_vertices_become_singletons() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0)]).unwrap();
        let (p, _) = ckr_partition_graph_with(&g, 4.0, &[2, 0, 3, 1], 1.0).unwrap();
        assert_eq!(p.blocks(), &[2, 2, 1, 3]);
    }

    #[test]
    fn prioritized_centers_come_first() {
        let g = cycle(10);
        let (p, _) =
            ckr_partition_graph_prioritized(&g, 4.0, |v| v % 3 == 0, &mut rng::master(5)).unwrap();
        let head: Vec<_> = p.centers()[..4].to_vec();
        assert!(head.iter().all(|v| v % 3 == 0), "{head:?}");
    }

    #[test]
    fn partition_text_round_trip() {
        let (p, _) = ckr_partition_graph(&cycle(7), 3.0, &mut rng::master(3)).unwrap();
        let rec = parse_partition(&p.to_text(3)).unwrap();
        assert_eq!(rec.blocks, p.blocks());
        assert_eq!(rec.delta, 3.0);
        assert_eq!(rec.radius, p.radius());
        assert_eq!(rec.seed, 3);
    }

    #[test]
    fn partition_parse_errors() {
        assert!(parse_partition("").is_err());
        assert!(parse_partition("4 1.5\n").is_err());
        assert!(parse_partition("4 3 1\n0 1\n").is_err()); // R > Δ/2
        assert!(matches!(parse_partition("4 1.5 1\n0 1\n0 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_partition("4 1.5 1\n0 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_partition("4 1.5 1\n0 1\n5 1\n"), Err(Error::Parse { line: 3, .. })));
    }
}
