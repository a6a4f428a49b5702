//! Multi-scale machinery: the bottleneck (single-linkage) merge tree, the
//! `σ_Δ` projection onto its clusters, quotient graphs, and the family of
//! per-scale quotient graphs `G_j` built with a sliding window over the
//! weight-sorted edge list.
//!
//! Scales are powers of 8. At scale `8^j` two vertices share a `σ` cluster
//! when their bottleneck distance is at most `8^j / 2n`; the quotient graph
//! `G_j` keeps the cluster-crossing edges of weight at most `8^j / 2`. Only
//! scales with a nonempty `G_j` are materialized, and every base edge shows
//! up in `O(log n)` of them.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Edge, VertexId, WeightedGraph};

/// Every scale is `SCALE_BASE^j` for an integer exponent `j`.
pub const SCALE_BASE: f64 = 8.0;

pub fn scale(j: i32) -> f64 {
    SCALE_BASE.powi(j)
}

/// Cluster threshold `Δ / 2n` for `Δ = 8^j`.
pub fn sigma_threshold(j: i32, n: usize) -> f64 {
    scale(j) / (2.0 * n as f64)
}

/// Smallest `j` with `x <= 8^j`, for finite positive `x`.
pub(crate) fn ceil_exponent(x: f64) -> i32 {
    debug_assert!(x.is_finite() && x > 0.0);
    let mut j = x.log(SCALE_BASE).ceil() as i32;
    while scale(j) < x {
        j += 1;
    }
    while scale(j - 1) >= x {
        j -= 1;
    }
    j
}

/// Largest `j` with `8^j <= x`, for finite positive `x`.
pub(crate) fn floor_exponent(x: f64) -> i32 {
    debug_assert!(x.is_finite() && x > 0.0);
    let mut j = x.log(SCALE_BASE).floor() as i32;
    while scale(j) > x {
        j -= 1;
    }
    while scale(j + 1) <= x {
        j += 1;
    }
    j
}

const NONE: usize = usize::MAX;

/// Single-linkage merge tree of the minimum spanning forest.
///
/// Leaves `0..n` are the vertices. Each internal node records the weight of
/// the MST edge that created it, so `Γ(lca(u, v))` is the minimax
/// (bottleneck) path weight between `u` and `v`, and
/// `ν_B(u,v) <= ρ(u,v) <= (n-1)·ν_B(u,v)`. Components of a disconnected
/// graph hang under a virtual root labeled `+∞`.
#[derive(Clone, Debug)]
pub struct BottleneckTree {
    n: usize,
    parent: Vec<usize>,
    gamma: Vec<f64>,
    children: Vec<Vec<usize>>,
    depth: Vec<u32>,
    // up[k][x] = 2^k-th ancestor of x, saturating at the root
    up: Vec<Vec<usize>>,
    root: usize,
}

impl BottleneckTree {
    pub fn build(g: &WeightedGraph) -> Self {
        let n = g.n();
        let mut order: Vec<usize> = (0..g.m()).collect();
        order.sort_by(|&a, &b| g.edges()[a].w.total_cmp(&g.edges()[b].w).then(a.cmp(&b)));

        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        // union-find representative -> tree node of its component
        let mut top: Vec<usize> = (0..n).collect();
        let mut parent = vec![NONE; n];
        let mut gamma = vec![0.0; n];
        let mut children = vec![Vec::new(); n];
        let mut components = n;

        for idx in order {
            let Edge { u, v, w } = g.edges()[idx];
            let (ru, rv) = (find(&mut uf, u), find(&mut uf, v));
            if ru == rv {
                continue;
            }
            let node = parent.len();
            let (a, b) = (top[ru], top[rv]);
            parent.push(NONE);
            gamma.push(w);
            children.push(vec![a.min(b), a.max(b)]);
            parent[a] = node;
            parent[b] = node;
            uf[ru] = rv;
            top[rv] = node;
            components -= 1;
        }

        let root = if n == 0 {
            NONE
        } else if components == 1 {
            parent.len() - 1
        } else {
            let node = parent.len();
            let mut kids: Vec<usize> = (0..n)
                .filter(|&v| find(&mut uf, v) == v)
                .map(|v| top[v])
                .collect();
            kids.sort_unstable();
            for &k in &kids {
                parent[k] = node;
            }
            parent.push(NONE);
            gamma.push(f64::INFINITY);
            children.push(kids);
            node
        };

        let total = parent.len();
        let mut depth = vec![0u32; total];
        // parents are created after their children, so a reverse scan sees
        // each parent before its children
        for x in (0..total).rev() {
            if parent[x] != NONE {
                depth[x] = depth[parent[x]] + 1;
            }
        }
        let mut up = vec![(0..total).map(|x| if parent[x] == NONE { x } else { parent[x] }).collect::<Vec<_>>()];
        let levels = (usize::BITS - total.max(1).leading_zeros()) as usize;
        for k in 1..levels.max(1) {
            let prev = &up[k - 1];
            let next: Vec<usize> = (0..total).map(|x| prev[prev[x]]).collect();
            up.push(next);
        }
        BottleneckTree { n, parent, gamma, children, depth, up, root }
    }

    pub fn num_leaves(&self) -> usize {
        self.n
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn gamma(&self, node: usize) -> f64 {
        self.gamma[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        let p = self.parent[node];
        (p != NONE).then_some(p)
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.n
    }

    /// Highest ancestor `u` of leaf `v` with `Γ(u) <= Δ/2n` (the leaf itself
    /// when no internal ancestor qualifies).
    pub fn sigma(&self, v: VertexId, delta: f64) -> usize {
        self.highest_below(v, delta / (2.0 * self.n as f64))
    }

    /// `σ` at scale `8^j`.
    pub fn sigma_at(&self, v: VertexId, j: i32) -> usize {
        self.highest_below(v, sigma_threshold(j, self.n))
    }

    fn highest_below(&self, v: VertexId, threshold: f64) -> usize {
        let mut x = v;
        for level in self.up.iter().rev() {
            let a = level[x];
            if self.gamma[a] <= threshold {
                x = a;
            }
        }
        x
    }

    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        if self.depth[a] < self.depth[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let diff = self.depth[a] - self.depth[b];
        for (k, level) in self.up.iter().enumerate() {
            if diff >> k & 1 == 1 {
                a = level[a];
            }
        }
        if a == b {
            return a;
        }
        for level in self.up.iter().rev() {
            if level[a] != level[b] {
                a = level[a];
                b = level[b];
            }
        }
        self.parent[a]
    }

    /// `ν_B(u, v) = Γ(lca(u, v))`: the bottleneck distance.
    pub fn bottleneck(&self, u: VertexId, v: VertexId) -> f64 {
        if u == v {
            0.0
        } else {
            self.gamma[self.lca(u, v)]
        }
    }
}

/// Keeps the edges of weight at most `delta` and drops isolated vertices.
#[derive(Clone, Debug)]
pub struct Restricted {
    /// Graph over compact ids `0..vertices.len()`.
    pub graph: WeightedGraph,
    /// Compact id -> original vertex id, ascending.
    pub vertices: Vec<VertexId>,
}

pub fn restrict(g: &WeightedGraph, delta: f64) -> Restricted {
    let mut keep = vec![false; g.n()];
    let kept: Vec<Edge> = g.edges().iter().copied().filter(|e| e.w <= delta).collect();
    for e in &kept {
        keep[e.u] = true;
        keep[e.v] = true;
    }
    let vertices: Vec<VertexId> = (0..g.n()).filter(|&v| keep[v]).collect();
    let mut compact = vec![NONE; g.n()];
    for (i, &v) in vertices.iter().enumerate() {
        compact[v] = i;
    }
    let edges = kept
        .into_iter()
        .map(|e| Edge { u: compact[e.u], v: compact[e.v], w: e.w })
        .collect();
    Restricted { graph: WeightedGraph::from_normalized(vertices.len(), edges), vertices }
}

/// The quotient of a graph by its `σ_Δ` clusters.
#[derive(Clone, Debug)]
pub struct QuotientGraph {
    pub graph: WeightedGraph,
    /// Base vertex -> quotient vertex.
    pub projection: Vec<usize>,
    /// Quotient vertex -> bottleneck-tree node (its `σ_Δ` image).
    pub nodes: Vec<usize>,
    pub delta: f64,
}

/// Contracts every `σ_Δ` cluster to one vertex. Quotient edges carry the
/// minimum weight of the base edges crossing between the two clusters.
pub fn quotient(g: &WeightedGraph, tree: &BottleneckTree, delta: f64) -> Result<QuotientGraph> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("scale must be positive and finite, got {delta}")));
    }
    let mut index = HashMap::new();
    let mut nodes = Vec::new();
    let projection: Vec<usize> = (0..g.n())
        .map(|v| {
            let s = tree.sigma(v, delta);
            *index.entry(s).or_insert_with(|| {
                nodes.push(s);
                nodes.len() - 1
            })
        })
        .collect();
    let edges = g
        .edges()
        .iter()
        .filter(|e| projection[e.u] != projection[e.v])
        .map(|e| Edge { u: projection[e.u], v: projection[e.v], w: e.w })
        .collect();
    Ok(QuotientGraph {
        graph: WeightedGraph::from_normalized(nodes.len(), edges),
        projection,
        nodes,
        delta,
    })
}

/// One processed scale: `G_j = (G_(8^j))|_{8^j/2}`.
#[derive(Clone, Debug)]
pub struct ScaleLevel {
    pub exponent: i32,
    /// Quotient graph over compact ids; every vertex has an edge.
    pub graph: WeightedGraph,
    /// Compact quotient vertex -> bottleneck-tree node.
    pub nodes: Vec<usize>,
    /// 1-based inclusive window `[i_L, i_R]` into the sorted edge list.
    pub window: (usize, usize),
    index: HashMap<usize, usize>,
}

impl ScaleLevel {
    /// Compact quotient vertex for a tree node, if it is in `V_j`.
    pub fn vertex_of(&self, node: usize) -> Option<usize> {
        self.index.get(&node).copied()
    }

    pub fn size(&self) -> usize {
        self.graph.n() + self.graph.m()
    }
}

/// The processed scales, in decreasing exponent order.
#[derive(Clone, Debug)]
pub struct ScaleFamily {
    n: usize,
    sorted: Vec<Edge>,
    levels: Vec<ScaleLevel>,
}

/// Builds the processed-scale family; rejects edgeless graphs.
pub fn build_scale_family(g: &WeightedGraph, tree: &BottleneckTree) -> Result<ScaleFamily> {
    if g.m() == 0 {
        return Err(Error::NoEdges);
    }
    Ok(ScaleFamily::build(g, tree))
}

impl ScaleFamily {
    /// Like [`build_scale_family`], but an edgeless graph yields an empty family.
    pub fn build(g: &WeightedGraph, tree: &BottleneckTree) -> Self {
        let n = g.n();
        let mut sorted: Vec<Edge> = g.edges().to_vec();
        // non-increasing weight; stable sort keeps edge-index order on ties
        sorted.sort_by(|a, b| b.w.total_cmp(&a.w));

        // Candidate exponents: j with 8^j/2n <= w <= 8^j for some edge.
        let mut ranges: Vec<(i32, i32)> = sorted
            .iter()
            .map(|e| (ceil_exponent(e.w), floor_exponent(2.0 * n as f64 * e.w)))
            .filter(|(lo, hi)| lo <= hi)
            .collect();
        ranges.sort_unstable_by_key(|r| std::cmp::Reverse(r.1));
        let mut merged: Vec<(i32, i32)> = Vec::new();
        for (lo, hi) in ranges {
            match merged.last_mut() {
                Some(last) if hi >= last.0 - 1 => last.0 = last.0.min(lo),
                _ => merged.push((lo, hi)),
            }
        }

        let mut levels = Vec::new();
        for (lo, hi) in merged {
            for j in (lo..=hi).rev() {
                if let Some(level) = Self::build_level(&sorted, tree, n, j) {
                    levels.push(level);
                }
            }
        }
        ScaleFamily { n, sorted, levels }
    }

    fn build_level(sorted: &[Edge], tree: &BottleneckTree, n: usize, j: i32) -> Option<ScaleLevel> {
        let upper = scale(j);
        let lower = sigma_threshold(j, n);
        let i_l = sorted.partition_point(|e| e.w > upper);
        let i_r = sorted.partition_point(|e| e.w >= lower);
        if i_l >= i_r {
            return None;
        }
        let cap = upper / 2.0;
        let mut index = HashMap::new();
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for e in &sorted[i_l..i_r] {
            if e.w > cap {
                continue;
            }
            let (a, b) = (tree.sigma_at(e.u, j), tree.sigma_at(e.v, j));
            if a == b {
                continue;
            }
            let mut id = |node: usize| {
                *index.entry(node).or_insert_with(|| {
                    nodes.push(node);
                    nodes.len() - 1
                })
            };
            let (qa, qb) = (id(a), id(b));
            edges.push(Edge { u: qa, v: qb, w: e.w });
        }
        if edges.is_empty() {
            return None;
        }
        Some(ScaleLevel {
            exponent: j,
            graph: WeightedGraph::from_normalized(nodes.len(), edges),
            nodes,
            window: (i_l + 1, i_r),
            index,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> &[ScaleLevel] {
        &self.levels
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Edges sorted by non-increasing weight, ties by edge index.
    pub fn sorted_edges(&self) -> &[Edge] {
        &self.sorted
    }

    /// `Σ_t (|V_{j_t}| + |E_{j_t}|)`.
    pub fn total_size(&self) -> usize {
        self.levels.iter().map(ScaleLevel::size).sum()
    }

    pub fn level(&self, j: i32) -> Option<&ScaleLevel> {
        self.levels.iter().find(|l| l.exponent == j)
    }

    /// Debug dump, one `j_t |V_j| |E_j| i_L i_R` line per scale.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for l in &self.levels {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                l.exponent,
                l.graph.n(),
                l.graph.m(),
                l.window.0,
                l.window.1
            );
        }
        out
    }
}
