//! Hierarchical CKR partitions.
//!
//! One CKR partition `L_j` is sampled per processed scale of the
//! [`ScaleFamily`], over that scale's quotient graph. The hierarchy at an
//! arbitrary scale `j` is the common refinement of the pullbacks of every
//! `L_{j'}` with `j' >= j`, further cut by the `σ_{8^j}` clusters. The
//! refinement is assembled top-down as a compressed tree in which each internal
//! node records the smallest scale at which its block is still whole.

use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use rand::Rng;

use crate::ckr::{ckr_partition_graph, ckr_partition_graph_prioritized, Partition};
use crate::error::{Error, Result};
use crate::graph::{dijkstra_multi, VertexId, WeightedGraph};
use crate::scales::{ceil_exponent, scale, sigma_threshold, BottleneckTree, ScaleFamily};
use crate::ultrametric::UltrametricTree;

const NONE: usize = usize::MAX;

/// Bottleneck tree plus scale family of one graph; built once and shared by
/// every hierarchy sampled over that graph.
#[derive(Clone, Debug)]
pub struct Multiscale {
    pub tree: BottleneckTree,
    pub family: ScaleFamily,
}

impl Multiscale {
    pub fn new(g: &WeightedGraph) -> Self {
        let tree = BottleneckTree::build(g);
        let family = ScaleFamily::build(g, &tree);
        Multiscale { tree, family }
    }

    pub fn n(&self) -> usize {
        self.tree.num_leaves()
    }
}

/// Compressed hierarchical partition. Leaves are points; an internal node `u`
/// carries `s(u)`, and the block of `x` at scale `j` is the highest ancestor of
/// `x` with `s <= j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierarchyTree {
    parent: Vec<usize>,
    // i32::MIN on leaves
    level: Vec<i32>,
    point: Vec<usize>,
    leaves: Vec<(usize, usize)>,
}

impl HierarchyTree {
    fn from_parts(parent: Vec<usize>, level: Vec<i32>, point: Vec<usize>) -> Self {
        let mut leaves: Vec<(usize, usize)> = point
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p != NONE)
            .map(|(u, &p)| (p, u))
            .collect();
        leaves.sort_unstable();
        HierarchyTree { parent, level, point, leaves }
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    /// Node 0 is always the root.
    pub fn root(&self) -> usize {
        0
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        let p = self.parent[node];
        (p != NONE).then_some(p)
    }

    /// `s(u)` for internal nodes, `None` for leaves.
    pub fn scale_of(&self, node: usize) -> Option<i32> {
        (self.point[node] == NONE).then_some(self.level[node])
    }

    pub fn point_of(&self, node: usize) -> Option<usize> {
        let p = self.point[node];
        (p != NONE).then_some(p)
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.point[node] != NONE
    }

    /// Points in ascending order.
    pub fn points(&self) -> impl Iterator<Item = usize> + '_ {
        self.leaves.iter().map(|&(p, _)| p)
    }

    pub fn leaf(&self, point: usize) -> Option<usize> {
        self.leaves
            .binary_search_by_key(&point, |&(p, _)| p)
            .ok()
            .map(|i| self.leaves[i].1)
    }

    /// Highest ancestor of `x` whose scale is at most `j`; the leaf itself
    /// when no internal ancestor qualifies.
    pub fn block_at(&self, x: usize, j: i32) -> Result<usize> {
        let mut u = self.leaf(x).ok_or(Error::UnknownPoint(x))?;
        while let Some(p) = self.parent(u) {
            if self.level[p] > j {
                break;
            }
            u = p;
        }
        Ok(u)
    }

    /// Points under `node`, ascending.
    pub fn members(&self, node: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .leaves
            .iter()
            .filter(|&&(_, leaf)| {
                let mut u = leaf;
                loop {
                    if u == node {
                        return true;
                    }
                    match self.parent(u) {
                        Some(p) => u = p,
                        None => return false,
                    }
                }
            })
            .map(|&(p, _)| p)
            .collect();
        out.sort_unstable();
        out
    }

    /// Text form: header `hierarchy N`, then per node `parent scale point`
    /// with `-` for a missing parent, scale (leaves) or point (internal).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "hierarchy {}", self.num_nodes());
        for u in 0..self.num_nodes() {
            let parent = self.parent(u).map_or("-".to_string(), |p| p.to_string());
            match self.point_of(u) {
                Some(x) => {
                    let _ = writeln!(out, "{parent} - {x}");
                }
                None => {
                    let _ = writeln!(out, "{parent} {} -", self.level[u]);
                }
            }
        }
        out
    }
}

/// Parses and validates the text form written by [`HierarchyTree::to_text`].
pub fn parse_hierarchy(text: &str) -> Result<HierarchyTree> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty document"))?;
    let count = header
        .strip_prefix("hierarchy ")
        .and_then(|c| c.trim().parse::<usize>().ok())
        .ok_or_else(|| Error::parse(hline, "expected \"hierarchy N\""))?;
    let mut parent = Vec::new();
    let mut level = Vec::new();
    let mut point = Vec::new();
    for (line, body) in lines {
        if body.is_empty() {
            continue;
        }
        if parent.len() == count {
            return Err(Error::parse(line, "more node lines than declared"));
        }
        let f: Vec<&str> = body.split_whitespace().collect();
        let [p, s, x] = f[..] else {
            return Err(Error::parse(line, "expected \"parent scale point\""));
        };
        let num = |field: &str, what: &str| -> Result<Option<usize>> {
            if field == "-" {
                Ok(None)
            } else {
                field.parse().map(Some).map_err(|_| Error::parse(line, format!("bad {what} {field:?}")))
            }
        };
        let p = num(p, "parent")?;
        let x = num(x, "point")?;
        let s = if s == "-" {
            None
        } else {
            Some(s.parse::<i32>().map_err(|_| Error::parse(line, format!("bad scale {s:?}")))?)
        };
        match (s, x) {
            (Some(s), None) if s != i32::MIN => {
                level.push(s);
                point.push(NONE);
            }
            (None, Some(x)) if x != NONE => {
                level.push(i32::MIN);
                point.push(x);
            }
            _ => return Err(Error::parse(line, "a node needs exactly one of scale or point")),
        }
        parent.push(p.unwrap_or(NONE));
    }
    if parent.len() != count {
        return Err(Error::parse(text.lines().count(), "fewer node lines than declared"));
    }
    validate(&parent, &level, &point).map_err(|m| Error::parse(hline, m))?;
    Ok(HierarchyTree::from_parts(parent, level, point))
}

fn validate(parent: &[usize], level: &[i32], point: &[usize]) -> std::result::Result<(), String> {
    let n = parent.len();
    if n == 0 {
        return Err("hierarchy has no nodes".into());
    }
    if parent[0] != NONE {
        return Err("node 0 must be the root".into());
    }
    let mut children = vec![0usize; n];
    for (u, &p) in parent.iter().enumerate().skip(1) {
        if p >= n || p == u {
            return Err(format!("node {u} has invalid parent"));
        }
        if point[p] != NONE {
            return Err(format!("leaf {p} has a child"));
        }
        // strict increase toward the root also rules out cycles
        if level[p] <= level[u] {
            return Err(format!("scale does not increase from node {u} to its parent"));
        }
        children[p] += 1;
    }
    for u in 0..n {
        if point[u] == NONE && (children[u] == 0 || (u != 0 && children[u] == 1)) {
            return Err(format!("internal node {u} has {} children", children[u]));
        }
    }
    let mut pts: Vec<usize> = point.iter().copied().filter(|&p| p != NONE).collect();
    pts.sort_unstable();
    if pts.windows(2).any(|w| w[0] == w[1]) {
        return Err("a point appears on two leaves".into());
    }
    Ok(())
}

/// `Γ(u) = 8^{s(u)}` on internal nodes and `0` on leaves.
pub fn hierarchy_to_ultrametric(h: &HierarchyTree) -> UltrametricTree {
    let parent = (0..h.num_nodes()).map(|u| h.parent(u)).collect();
    let gamma = (0..h.num_nodes())
        .map(|u| h.scale_of(u).map_or(0.0, scale))
        .collect();
    let leaves = h.leaves.clone();
    UltrametricTree::new(parent, gamma, leaves).expect("hierarchy trees map to valid ultrametric trees")
}

/// The CKR partition sampled for one processed scale, over the compact
/// vertices of that scale's quotient graph.
#[derive(Clone, Debug)]
pub struct ScalePartition {
    pub exponent: i32,
    pub partition: Partition,
}

#[derive(Clone, Debug)]
pub struct SampledHierarchy {
    pub tree: HierarchyTree,
    pub partitions: Vec<ScalePartition>,
}

/// Samples a hierarchy over the `active` vertices of `g`.
pub fn sample_hierarchy<R: Rng + ?Sized>(
    g: &WeightedGraph,
    active: &[VertexId],
    rng: &mut R,
) -> Result<SampledHierarchy> {
    sample_hierarchy_in(&Multiscale::new(g), active, rng)
}

/// Like [`sample_hierarchy`] with a prebuilt [`Multiscale`].
///
/// The scale family always covers the whole graph. At every scale, quotient
/// vertices holding an active point precede all others in the permutation,
/// so restricted to active points each `L_j` is a CKR partition with centers
/// drawn from the active set. Inactive points are pruned from the output.
pub fn sample_hierarchy_in<R: Rng + ?Sized>(
    ms: &Multiscale,
    active: &[VertexId],
    rng: &mut R,
) -> Result<SampledHierarchy> {
    let n = ms.n();
    let mut is_active = vec![false; n];
    for &x in active {
        if x >= n {
            return Err(Error::UnknownPoint(x));
        }
        is_active[x] = true;
    }
    let weight = active_counts(&ms.tree, &is_active);
    if weight[ms.tree.root()] == 0 {
        return Err(Error::invalid("active set is empty"));
    }
    let mut partitions = Vec::with_capacity(ms.family.levels().len());
    for level in ms.family.levels() {
        let nodes = &level.nodes;
        let (partition, _) =
            ckr_partition_graph_prioritized(&level.graph, scale(level.exponent) / 2.0, |q| weight[nodes[q]] > 0, rng)?;
        partitions.push(ScalePartition { exponent: level.exponent, partition });
    }
    let tree = assemble(ms, &partitions, &weight)?;
    Ok(SampledHierarchy { tree, partitions })
}

// Number of active points under each bottleneck-tree node.
fn active_counts(tree: &BottleneckTree, is_active: &[bool]) -> Vec<usize> {
    let mut count = vec![0usize; tree.num_nodes()];
    for (v, &a) in is_active.iter().enumerate() {
        count[v] = a as usize;
    }
    // internal nodes are numbered after their children
    for u in 0..tree.num_nodes() {
        if let Some(p) = tree.parent(u) {
            count[p] += count[u];
        }
    }
    count
}

#[derive(Clone, Copy, PartialEq)]
struct Keyed(f64, usize);

impl Eq for Keyed {}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

// Largest e with gamma > 8^e / 2n, i.e. the scale at which the cluster is
// first replaced by its children when descending.
fn split_exponent(gamma: f64, n: usize) -> i32 {
    let mut e = ceil_exponent(2.0 * n as f64 * gamma) - 1;
    while gamma <= sigma_threshold(e, n) {
        e -= 1;
    }
    while gamma > sigma_threshold(e + 1, n) {
        e += 1;
    }
    e
}

struct Block {
    node: usize,
    clusters: Vec<usize>,
}

struct Builder<'a> {
    tree: &'a BottleneckTree,
    weight: &'a [usize],
    parent: Vec<usize>,
    level: Vec<i32>,
    point: Vec<usize>,
    blocks: Vec<Option<Block>>,
    owner: Vec<usize>,
    heap: BinaryHeap<Keyed>,
}

impl Builder<'_> {
    fn new_node(&mut self, parent: usize) -> usize {
        self.parent.push(parent);
        self.level.push(i32::MIN);
        self.point.push(NONE);
        self.parent.len() - 1
    }

    fn track(&mut self, cluster: usize, block: usize) {
        self.owner[cluster] = block;
        if !self.tree.is_leaf(cluster) {
            self.heap.push(Keyed(self.tree.gamma(cluster), cluster));
        }
    }

    fn only_point(&self, mut c: usize) -> usize {
        while !self.tree.is_leaf(c) {
            c = *self
                .tree
                .children(c)
                .iter()
                .find(|&&ch| self.weight[ch] > 0)
                .expect("a cluster with active points has an active child");
        }
        c
    }

    // Opens a block for `clusters` under hierarchy node `parent`; a single
    // active point becomes a leaf instead.
    fn open(&mut self, parent: usize, clusters: Vec<usize>) -> Option<usize> {
        let total: usize = clusters.iter().map(|&c| self.weight[c]).sum();
        let node = if parent == NONE { 0 } else { self.new_node(parent) };
        if total == 1 {
            let c = *clusters.iter().find(|&&c| self.weight[c] > 0).unwrap();
            self.point[node] = self.only_point(c);
            return None;
        }
        let id = self.blocks.len();
        for &c in &clusters {
            self.track(c, id);
        }
        let multi = clusters.len() > 1;
        self.blocks.push(Some(Block { node, clusters }));
        multi.then_some(id)
    }

    fn descend(&self, c: usize, threshold: f64, out: &mut Vec<usize>) {
        if self.tree.gamma(c) <= threshold {
            out.push(c);
        } else {
            for &ch in self.tree.children(c) {
                if self.weight[ch] > 0 {
                    self.descend(ch, threshold, out);
                }
            }
        }
    }
}

fn assemble(ms: &Multiscale, partitions: &[ScalePartition], weight: &[usize]) -> Result<HierarchyTree> {
    let tree = &ms.tree;
    let n = ms.n();
    let levels = ms.family.levels();
    let mut b = Builder {
        tree,
        weight,
        parent: vec![NONE],
        level: vec![i32::MIN],
        point: vec![NONE],
        blocks: Vec::new(),
        owner: vec![NONE; tree.num_nodes()],
        heap: BinaryHeap::new(),
    };
    let root = tree.root();
    let initial: Vec<usize> = if tree.gamma(root).is_infinite() {
        tree.children(root).iter().copied().filter(|&c| weight[c] > 0).collect()
    } else {
        vec![root]
    };
    // node 0 exists up front; `open` reuses it for the root block
    let mut multi: Vec<usize> = b.open(NONE, initial).into_iter().collect();

    let mut next_level = 0;
    let mut last: Option<i32> = None;
    loop {
        while let Some(&Keyed(_, c)) = b.heap.peek() {
            if b.owner[c] == NONE {
                b.heap.pop();
            } else {
                break;
            }
        }
        let mut event = None;
        if next_level < levels.len() {
            event = Some(levels[next_level].exponent);
        }
        if let Some(&Keyed(g, _)) = b.heap.peek() {
            let e = split_exponent(g, n);
            event = Some(event.map_or(e, |x: i32| x.max(e)));
        }
        if !multi.is_empty() {
            match last {
                Some(l) => event = Some(event.map_or(l - 1, |x| x.max(l - 1))),
                None => event = event.or(Some(0)),
            }
        }
        let Some(e) = event else { break };
        let threshold = sigma_threshold(e, n);
        let processed = (next_level < levels.len() && levels[next_level].exponent == e).then(|| {
            next_level += 1;
            (&levels[next_level - 1], &partitions[next_level - 1].partition)
        });

        let mut dirty = std::mem::take(&mut multi);
        while let Some(&Keyed(g, c)) = b.heap.peek() {
            if g <= threshold {
                break;
            }
            b.heap.pop();
            if b.owner[c] != NONE {
                dirty.push(b.owner[c]);
            }
        }
        dirty.sort_unstable();
        dirty.dedup();

        for id in dirty {
            let Some(block) = b.blocks[id].take() else { continue };
            let mut clusters = Vec::with_capacity(block.clusters.len());
            for &c in &block.clusters {
                let before = clusters.len();
                b.descend(c, threshold, &mut clusters);
                if clusters.len() != before + 1 || clusters[before] != c {
                    b.owner[c] = NONE;
                }
            }
            let mut groups: Vec<Vec<usize>> = Vec::new();
            match processed {
                Some((level, partition)) => {
                    let mut by_label: HashMap<u32, usize> = HashMap::new();
                    for &c in &clusters {
                        match level.vertex_of(c) {
                            Some(q) => {
                                let g = *by_label.entry(partition.block(q)).or_insert_with(|| {
                                    groups.push(Vec::new());
                                    groups.len() - 1
                                });
                                groups[g].push(c);
                            }
                            None => groups.push(vec![c]),
                        }
                    }
                }
                None => groups.extend(clusters.iter().map(|&c| vec![c])),
            }
            if groups.len() == 1 {
                for &c in &clusters {
                    if b.owner[c] != id {
                        b.track(c, id);
                    }
                }
                if clusters.len() > 1 {
                    multi.push(id);
                }
                b.blocks[id] = Some(Block { node: block.node, clusters });
                continue;
            }
            b.level[block.node] = e + 1;
            for c in &clusters {
                b.owner[*c] = NONE;
            }
            for group in groups {
                multi.extend(b.open(block.node, group));
            }
        }
        if let Some(l) = last {
            if e >= l {
                return Err(Error::Invariant(format!("refinement scales not decreasing: {e} after {l}")));
            }
        }
        last = Some(e);
    }
    if b.blocks.iter().any(Option::is_some) {
        // blocks still open hold a single cluster that never splits, which
        // would mean two active points share a bottleneck-tree leaf
        if b.blocks.iter().flatten().any(|bl| bl.clusters.iter().map(|&c| weight[c]).sum::<usize>() > 1) {
            return Err(Error::Invariant("hierarchy assembly left an unsplit block".into()));
        }
    }
    Ok(HierarchyTree::from_parts(b.parent, b.level, b.point))
}

/// Points that are `β`-padded at every processed scale.
#[derive(Clone, Debug, PartialEq)]
pub struct PaddedSet {
    pub points: Vec<VertexId>,
    pub beta: f64,
}

impl PaddedSet {
    pub fn contains(&self, x: VertexId) -> bool {
        self.points.binary_search(&x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Marks the vertices of `g` within `radius` of a cut edge: a virtual source
/// joins both endpoints of every edge whose endpoints lie in different
/// blocks, with that edge's weight, and a bounded search runs from it.
pub fn near_cut(g: &WeightedGraph, blocks: &[u32], radius: f64) -> Vec<bool> {
    let seeds: Vec<(VertexId, f64)> = g
        .edges()
        .iter()
        .filter(|e| blocks[e.u] != blocks[e.v])
        .flat_map(|e| [(e.u, e.w), (e.v, e.w)])
        .collect();
    let dist = dijkstra_multi(g, &seeds, Some(radius));
    (0..g.n()).map(|v| dist.get(v).is_some_and(|d| d <= radius)).collect()
}

/// Active points whose `β·8^j` neighborhood stays inside their block at every
/// processed scale `j`; the per-scale test radius is `2β` times the scale's
/// partition bound `8^j/2`. Points absent from a scale's quotient graph are
/// padded there automatically.
pub fn padded_points(
    ms: &Multiscale,
    partitions: &[ScalePartition],
    beta: f64,
    active: &[VertexId],
) -> Result<PaddedSet> {
    if !(beta > 0.0 && beta < 0.125) {
        return Err(Error::invalid(format!("padding parameter must lie in (0, 1/8), got {beta}")));
    }
    let levels = ms.family.levels();
    if partitions.len() != levels.len() {
        return Err(Error::invalid("one partition per processed scale is required"));
    }
    let tree = &ms.tree;
    let mut marked = vec![false; tree.num_nodes()];
    for (level, sp) in levels.iter().zip(partitions) {
        if sp.exponent != level.exponent || sp.partition.len() != level.graph.n() {
            return Err(Error::invalid(format!("partition does not match scale {}", level.exponent)));
        }
        let unpadded = near_cut(&level.graph, sp.partition.blocks(), beta * scale(level.exponent));
        for (q, &u) in unpadded.iter().enumerate() {
            if u {
                marked[level.nodes[q]] = true;
            }
        }
    }
    // a point is unpadded iff one of its ancestors was marked; parents are
    // numbered after children, so sweep from the top down
    for u in (0..tree.num_nodes()).rev() {
        if let Some(p) = tree.parent(u) {
            if marked[p] {
                marked[u] = true;
            }
        }
    }
    let mut points: Vec<VertexId> = active.iter().copied().filter(|&x| x < ms.n() && !marked[x]).collect();
    points.sort_unstable();
    points.dedup();
    Ok(PaddedSet { points, beta })
}

/// Pullback to base vertices of a `Δ/2`-bounded CKR partition of the
/// `σ_Δ` quotient graph. Returns one block label per vertex.
pub fn pullback_partition<R: Rng + ?Sized>(
    g: &WeightedGraph,
    tree: &BottleneckTree,
    delta: f64,
    rng: &mut R,
) -> Result<Vec<u32>> {
    let q = crate::scales::quotient(g, tree, delta)?;
    let (partition, _) = ckr_partition_graph(&q.graph, delta / 2.0, rng)?;
    Ok(q.projection.iter().map(|&v| partition.block(v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::exact_metric;
    use crate::rng::master;

    fn cycle(n: usize) -> WeightedGraph {
        WeightedGraph::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0))).unwrap()
    }

    fn path3() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn check_shape(h: &HierarchyTree) {
        validate(&h.parent, &h.level, &h.point).unwrap();
        assert!(h.num_nodes() <= 2 * h.num_leaves());
    }

    #[test]
    fn single_active_point() {
        let g = path3();
        let s = sample_hierarchy(&g, &[1], &mut master(3)).unwrap();
        assert_eq!(s.tree.num_nodes(), 1);
        assert_eq!(s.tree.point_of(0), Some(1));
        assert_eq!(s.tree.block_at(1, 100).unwrap(), 0);
    }

    #[test]
    fn empty_active_set_rejected() {
        assert!(sample_hierarchy(&path3(), &[], &mut master(0)).is_err());
        assert!(sample_hierarchy(&path3(), &[5], &mut master(0)).is_err());
    }

    #[test]
    fn two_points_shape() {
        for d in [0.3, 1.0, 7.0, 100.0] {
            let g = WeightedGraph::new(2, [(0, 1, d)]).unwrap();
            for seed in 0..50 {
                let s = sample_hierarchy(&g, &[0, 1], &mut master(seed)).unwrap();
                let h = &s.tree;
                assert_eq!(h.num_nodes(), 3);
                let top = h.scale_of(0).unwrap();
                assert!(scale(top) >= d, "d={d} top={top}");
                let nu = hierarchy_to_ultrametric(h).distance(0, 1).unwrap();
                assert!(nu >= d && nu <= 32.0 * d, "d={d} nu={nu}");
            }
        }
    }

    // P_j by definition: the pullback of every sampled partition at scales
    // j' >= j, further cut by the σ_{8^j} clusters when j itself is not
    // processed.
    fn brute_force_key(ms: &Multiscale, parts: &[ScalePartition], x: usize, j: i32) -> Vec<i64> {
        let mut key = Vec::new();
        if ms.family.level(j).is_none() {
            key.push(ms.tree.sigma_at(x, j) as i64);
        }
        for (level, sp) in ms.family.levels().iter().zip(parts) {
            if level.exponent < j {
                continue;
            }
            let node = ms.tree.sigma_at(x, level.exponent);
            key.push(match level.vertex_of(node) {
                Some(q) => sp.partition.block(q) as i64,
                None => -(node as i64) - 1,
            });
        }
        key
    }

    fn check_against_brute_force(g: &WeightedGraph, seeds: std::ops::Range<u64>) {
        let ms = Multiscale::new(g);
        let all: Vec<usize> = (0..g.n()).collect();
        let metric = exact_metric(g);
        let lo = ms.family.levels().last().map_or(0, |l| l.exponent) - 3;
        let hi = ms.family.levels().first().map_or(0, |l| l.exponent) + 3;
        for seed in seeds {
            let s = sample_hierarchy_in(&ms, &all, &mut master(seed)).unwrap();
            check_shape(&s.tree);
            for j in lo..=hi {
                for x in 0..g.n() {
                    let bx = s.tree.block_at(x, j).unwrap();
                    let bx_up = s.tree.block_at(x, j + 1).unwrap();
                    assert!(s.tree.members(bx_up).contains(&x));
                    for y in 0..g.n() {
                        let same = bx == s.tree.block_at(y, j).unwrap();
                        let expect =
                            brute_force_key(&ms, &s.partitions, x, j) == brute_force_key(&ms, &s.partitions, y, j);
                        assert_eq!(same, expect, "seed {seed} j {j} x {x} y {y}");
                        if same {
                            assert!(metric.get(x, y) <= scale(j));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn path_matches_pulled_back_partitions() {
        check_against_brute_force(&path3(), 0..40);
    }

    #[test]
    fn weighted_graphs_match_pulled_back_partitions() {
        let g = WeightedGraph::new(
            7,
            [(0, 1, 0.01), (1, 2, 3.0), (2, 3, 900.0), (3, 4, 1.0), (4, 5, 40.0), (5, 6, 2.0), (6, 0, 5000.0)],
        )
        .unwrap();
        check_against_brute_force(&g, 0..30);
        check_against_brute_force(&cycle(12), 0..10);
    }

    #[test]
    fn block_at_limits_and_monotonicity() {
        let g = cycle(10);
        let s = sample_hierarchy(&g, &(0..10).collect::<Vec<_>>(), &mut master(11)).unwrap();
        let h = &s.tree;
        let top = h.scale_of(0).unwrap();
        for x in 0..10 {
            assert_eq!(h.block_at(x, top).unwrap(), 0);
            assert_eq!(h.block_at(x, -50).unwrap(), h.leaf(x).unwrap());
            for j in -5..top + 2 {
                let low = h.block_at(x, j - 1).unwrap();
                let high = h.block_at(x, j).unwrap();
                let mut u = low;
                while u != high {
                    u = h.parent(u).expect("coarser block is an ancestor");
                }
            }
        }
    }

    #[test]
    fn subset_hierarchy_prunes_inactive_points() {
        let g = cycle(16);
        let active = [1, 4, 5, 11];
        for seed in 0..20 {
            let s = sample_hierarchy(&g, &active, &mut master(seed)).unwrap();
            check_shape(&s.tree);
            assert_eq!(s.tree.points().collect::<Vec<_>>(), active.to_vec());
            let u = hierarchy_to_ultrametric(&s.tree);
            let m = exact_metric(&g);
            for &x in &active {
                for &y in &active {
                    assert!(u.distance(x, y).unwrap() >= m.get(x, y));
                }
            }
        }
    }

    #[test]
    fn disconnected_graph_hierarchy() {
        let g = WeightedGraph::new(5, [(0, 1, 1.0), (2, 3, 2.0)]).unwrap();
        let s = sample_hierarchy(&g, &[0, 1, 2, 3, 4], &mut master(1)).unwrap();
        check_shape(&s.tree);
        assert_eq!(s.tree.num_leaves(), 5);
    }

    #[test]
    fn ultrametric_relabeling() {
        let h = HierarchyTree::from_parts(vec![NONE, 0, 0], vec![2, i32::MIN, i32::MIN], vec![NONE, 4, 9]);
        let u = hierarchy_to_ultrametric(&h);
        assert_eq!(u.distance(4, 9).unwrap(), 64.0);
        let single = HierarchyTree::from_parts(vec![NONE], vec![i32::MIN], vec![0]);
        assert_eq!(hierarchy_to_ultrametric(&single).num_leaves(), 1);
    }

    #[test]
    fn cycle4_cut_distances() {
        let g = cycle(4);
        let blocks = [1, 1, 2, 2];
        assert_eq!(near_cut(&g, &blocks, 0.5), vec![false; 4]);
        assert_eq!(near_cut(&g, &blocks, 1.0), vec![true; 4]);
        assert_eq!(near_cut(&g, &[1, 1, 1, 1], 100.0), vec![false; 4]);
    }

    #[test]
    fn padded_points_are_sound() {
        let g = cycle(24);
        let ms = Multiscale::new(&g);
        let m = exact_metric(&g);
        let all: Vec<usize> = (0..24).collect();
        let beta = 1.0 / 64.0;
        let mut seen = 0;
        for seed in 0..40 {
            let s = sample_hierarchy_in(&ms, &all, &mut master(seed)).unwrap();
            let padded = padded_points(&ms, &s.partitions, beta, &all).unwrap();
            seen += padded.len();
            for &x in &padded.points {
                for level in ms.family.levels() {
                    let j = level.exponent;
                    let bx = s.tree.block_at(x, j).unwrap();
                    for y in 0..24 {
                        if m.get(x, y) <= beta * scale(j) {
                            assert_eq!(s.tree.block_at(y, j).unwrap(), bx);
                        }
                    }
                }
            }
        }
        assert!(seen > 0);
        assert!(padded_points(&ms, &[], 0.125, &all).is_err());
    }

    #[test]
    fn text_round_trip() {
        let g = cycle(9);
        let s = sample_hierarchy(&g, &(0..9).collect::<Vec<_>>(), &mut master(5)).unwrap();
        let text = s.tree.to_text();
        let back = parse_hierarchy(&text).unwrap();
        assert_eq!(back, s.tree);
        assert!(parse_hierarchy("hierarchy 2\n- 3 -\n0 - 1\n").is_ok());
        assert!(parse_hierarchy("hierarchy 4\n- 3 -\n0 4 -\n1 - 0\n0 - 1\n").is_err());
        assert!(parse_hierarchy("hierarchy 3\n- 3 -\n0 - 1\n0 5 -\n").is_err());
        assert!(parse_hierarchy("hierarchy 1\n- - 0\n").is_ok());
    }

    #[test]
    fn pullback_absorbs_small_balls() {
        let g = WeightedGraph::new(6, [(0, 1, 0.1), (1, 2, 2.0), (2, 3, 0.2), (3, 4, 3.0), (4, 5, 1.0)]).unwrap();
        let tree = BottleneckTree::build(&g);
        let m = exact_metric(&g);
        let delta = 8.0;
        for seed in 0..200 {
            let labels = pullback_partition(&g, &tree, delta, &mut master(seed)).unwrap();
            for x in 0..6 {
                for y in 0..6 {
                    if m.get(x, y) <= delta / 12.0 {
                        assert_eq!(labels[x], labels[y]);
                    }
                    if labels[x] == labels[y] {
                        assert!(m.get(x, y) <= delta);
                    }
                }
            }
        }
    }
}
