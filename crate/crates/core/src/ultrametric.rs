//! Ultrametric trees: labeled rooted trees whose leaves are points and whose
//! leaf distance is the label of the lowest common ancestor.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

/// Constant-time LCA via an Euler tour and a sparse table of depth minima.
#[derive(Clone, Debug)]
struct EulerLca {
    first: Vec<u32>,
    // table[k][i] = euler index of the shallowest node in tour[i .. i + 2^k]
    tour: Vec<u32>,
    depth: Vec<u32>,
    table: Vec<Vec<u32>>,
}

impl EulerLca {
    fn new(root: u32, child_offsets: &[usize], child_list: &[u32]) -> Self {
        let nodes = child_offsets.len() - 1;
        let mut first = vec![NONE; nodes];
        let mut tour = Vec::with_capacity(2 * nodes);
        let mut depth = Vec::with_capacity(2 * nodes);
        // (node, depth, next child cursor)
        let mut stack = vec![(root, 0u32, child_offsets[root as usize])];
        first[root as usize] = 0;
        tour.push(root);
        depth.push(0);
        while let Some(top) = stack.last_mut() {
            let (node, d, cursor) = *top;
            if cursor < child_offsets[node as usize + 1] {
                top.2 += 1;
                let child = child_list[cursor];
                first[child as usize] = tour.len() as u32;
                tour.push(child);
                depth.push(d + 1);
                stack.push((child, d + 1, child_offsets[child as usize]));
            } else {
                stack.pop();
                if let Some(&(parent, pd, _)) = stack.last() {
                    tour.push(parent);
                    depth.push(pd);
                }
            }
        }
        let len = tour.len();
        let mut table = vec![(0..len as u32).collect::<Vec<u32>>()];
        let mut span = 1;
        while 2 * span <= len {
            let prev = table.last().unwrap();
            let next: Vec<u32> = (0..=len - 2 * span)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + span]);
                    if depth[b as usize] < depth[a as usize] { b } else { a }
                })
                .collect();
            table.push(next);
            span *= 2;
        }
        EulerLca { first, tour, depth, table }
    }

    fn lca(&self, a: u32, b: u32) -> u32 {
        let (mut l, mut r) = (self.first[a as usize] as usize, self.first[b as usize] as usize);
        if l > r {
            std::mem::swap(&mut l, &mut r);
        }
        let k = (usize::BITS - 1 - (r - l + 1).leading_zeros()) as usize;
        let row = &self.table[k];
        let (x, y) = (row[l], row[r + 1 - (1 << k)]);
        let best = if self.depth[y as usize] < self.depth[x as usize] { y } else { x };
        self.tour[best as usize]
    }
}

/// A rooted tree with labels `Γ >= 0`, zero exactly on the leaves and
/// non-decreasing toward the root. Leaves carry distinct point ids; the
/// distance between two points is `Γ(lca)`.
#[derive(Clone, Debug)]
pub struct UltrametricTree {
    parent: Vec<u32>,
    gamma: Vec<f64>,
    // (point, leaf node), sorted by point
    leaves: Vec<(u32, u32)>,
    root: u32,
    lca: EulerLca,
}

impl UltrametricTree {
    /// Validates and indexes a tree given as a parent array (`None` for the
    /// root), labels, and `(point, leaf node)` pairs.
    pub fn new(parent: Vec<Option<usize>>, gamma: Vec<f64>, leaves: Vec<(usize, usize)>) -> Result<Self> {
        let n = parent.len();
        if n == 0 || n >= NONE as usize {
            return Err(Error::invalid(format!("tree must have between 1 and {} nodes", NONE - 1)));
        }
        if gamma.len() != n {
            return Err(Error::invalid("label count differs from node count"));
        }
        let mut root = None;
        let mut child_count = vec![0usize; n + 1];
        for (u, p) in parent.iter().enumerate() {
            match *p {
                None if root.is_some() => return Err(Error::invalid("tree has more than one root")),
                None => root = Some(u),
                Some(p) if p >= n || p == u => {
                    return Err(Error::invalid(format!("node {u} has invalid parent {p}")))
                }
                Some(p) => child_count[p] += 1,
            }
        }
        let root = root.ok_or_else(|| Error::invalid("tree has no root"))?;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for c in &child_count[..n] {
            offsets.push(acc);
            acc += c;
        }
        offsets.push(acc);
        let mut fill = offsets.clone();
        let mut children = vec![0u32; acc];
        for (u, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                children[fill[p]] = u as u32;
                fill[p] += 1;
            }
        }
        // reachability from the root rules out cycles
        let mut seen = 0;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            seen += 1;
            stack.extend(children[offsets[u]..offsets[u + 1]].iter().map(|&c| c as usize));
        }
        if seen != n {
            return Err(Error::invalid("parent array contains a cycle"));
        }
        for u in 0..n {
            let g = gamma[u];
            let is_leaf = offsets[u] == offsets[u + 1];
            if g.is_nan() || g < 0.0 {
                return Err(Error::invalid(format!("node {u} has invalid label {g}")));
            }
            if is_leaf != (g == 0.0) {
                return Err(Error::invalid(format!("node {u}: label is zero iff leaf is violated")));
            }
            if let Some(p) = parent[u] {
                if gamma[p] < g {
                    return Err(Error::invalid(format!("node {u} has a larger label than its parent")));
                }
            }
        }
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(leaves.len());
        let mut has_point = vec![false; n];
        for (point, node) in leaves {
            if node >= n || offsets[node] != offsets[node + 1] {
                return Err(Error::invalid(format!("point {point} attached to non-leaf node {node}")));
            }
            if point >= NONE as usize {
                return Err(Error::invalid(format!("point id {point} too large")));
            }
            if std::mem::replace(&mut has_point[node], true) {
                return Err(Error::invalid(format!("leaf {node} carries two points")));
            }
            pairs.push((point as u32, node as u32));
        }
        if let Some(u) = (0..n).find(|&u| offsets[u] == offsets[u + 1] && !has_point[u]) {
            return Err(Error::invalid(format!("leaf {u} has no point")));
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("a point appears on two leaves"));
        }
        let lca = EulerLca::new(root as u32, &offsets, &children);
        Ok(UltrametricTree {
            parent: parent.into_iter().map(|p| p.map_or(NONE, |p| p as u32)).collect(),
            gamma,
            leaves: pairs,
            root: root as u32,
            lca,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn root(&self) -> usize {
        self.root as usize
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        let p = self.parent[node];
        (p != NONE).then_some(p as usize)
    }

    pub fn gamma(&self, node: usize) -> f64 {
        self.gamma[node]
    }

    /// Points in ascending order.
    pub fn points(&self) -> impl Iterator<Item = usize> + '_ {
        self.leaves.iter().map(|&(p, _)| p as usize)
    }

    /// `(point, leaf node)` pairs sorted by point.
    pub fn leaf_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.leaves.iter().map(|&(p, l)| (p as usize, l as usize))
    }

    pub fn leaf(&self, point: usize) -> Option<usize> {
        let key = u32::try_from(point).ok()?;
        self.leaves
            .binary_search_by_key(&key, |&(p, _)| p)
            .ok()
            .map(|i| self.leaves[i].1 as usize)
    }

    pub fn lca(&self, a: usize, b: usize) -> usize {
        self.lca.lca(a as u32, b as u32) as usize
    }

    /// `Γ(lca(a, b))` for two node ids.
    #[inline]
    pub fn node_distance(&self, a: usize, b: usize) -> f64 {
        if a == b {
            0.0
        } else {
            self.gamma[self.lca.lca(a as u32, b as u32) as usize]
        }
    }

    pub fn distance(&self, x: usize, y: usize) -> Result<f64> {
        let a = self.leaf(x).ok_or(Error::UnknownPoint(x))?;
        let b = self.leaf(y).ok_or(Error::UnknownPoint(y))?;
        Ok(self.node_distance(a, b))
    }

    /// Text form: header `ultrametric N`, then per node `parent gamma point`
    /// with `-` for a missing parent or point.
    pub fn to_text(&self) -> String {
        let mut point_of = vec![None; self.num_nodes()];
        for &(p, l) in &self.leaves {
            point_of[l as usize] = Some(p);
        }
        let mut out = String::new();
        let _ = writeln!(out, "ultrametric {}", self.num_nodes());
        for (u, point) in point_of.iter().enumerate() {
            let parent = self.parent(u).map_or("-".to_string(), |p| p.to_string());
            let point = point.map_or("-".to_string(), |p| p.to_string());
            let _ = writeln!(out, "{parent} {} {point}", self.gamma[u]);
        }
        out
    }
}

/// `Γ(lca(x, y))` for two points of `tree`.
pub fn ultra_distance(tree: &UltrametricTree, x: usize, y: usize) -> Result<f64> {
    tree.distance(x, y)
}

fn parse_opt(field: &str, line: usize, what: &str) -> Result<Option<usize>> {
    if field == "-" {
        Ok(None)
    } else {
        field
            .parse()
            .map(Some)
            .map_err(|_| Error::parse(line, format!("bad {what} {field:?}")))
    }
}

/// Parses the text form written by [`UltrametricTree::to_text`].
pub fn parse_ultrametric(text: &str) -> Result<UltrametricTree> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty document"))?;
    let count = header
        .strip_prefix("ultrametric ")
        .and_then(|c| c.trim().parse::<usize>().ok())
        .ok_or_else(|| Error::parse(hline, "expected \"ultrametric N\""))?;
    let mut parent = Vec::new();
    let mut gamma = Vec::new();
    let mut leaves = Vec::new();
    for (line, body) in lines {
        if body.is_empty() {
            continue;
        }
        if parent.len() == count {
            return Err(Error::parse(line, "more node lines than declared"));
        }
        let f: Vec<&str> = body.split_whitespace().collect();
        let [p, g, x] = f[..] else {
            return Err(Error::parse(line, "expected \"parent gamma point\""));
        };
        let g: f64 = g.parse().map_err(|_| Error::parse(line, format!("bad label {g:?}")))?;
        let node = parent.len();
        parent.push(parse_opt(p, line, "parent")?);
        gamma.push(g);
        if let Some(x) = parse_opt(x, line, "point")? {
            leaves.push((x, node));
        }
    }
    if parent.len() != count {
        return Err(Error::parse(text.lines().count(), "fewer node lines than declared"));
    }
    UltrametricTree::new(parent, gamma, leaves).map_err(|e| Error::parse(hline, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_leaves(label: f64) -> UltrametricTree {
        UltrametricTree::new(vec![None, Some(0), Some(0)], vec![label, 0.0, 0.0], vec![(7, 1), (3, 2)]).unwrap()
    }

    #[test]
    fn basic_distances() {
        let t = two_leaves(64.0);
        assert_eq!(ultra_distance(&t, 7, 3).unwrap(), 64.0);
        assert_eq!(ultra_distance(&t, 3, 7).unwrap(), 64.0);
        assert_eq!(ultra_distance(&t, 3, 3).unwrap(), 0.0);
        assert!(matches!(ultra_distance(&t, 3, 4), Err(Error::UnknownPoint(4))));
    }

    #[test]
    fn single_leaf_tree() {
        let t = UltrametricTree::new(vec![None], vec![0.0], vec![(0, 0)]).unwrap();
        assert_eq!(t.distance(0, 0).unwrap(), 0.0);
    }

    #[test]
    fn lca_on_deeper_tree() {
        //        0 (9)
        //      /      \
        //    1 (4)    2 (0) p=2
        //   /    \
        // 3 (0)  4 (1)
        //  p=0   /   \
        //      5      6      p=1, p=3
        let t = UltrametricTree::new(
            vec![None, Some(0), Some(0), Some(1), Some(1), Some(4), Some(4)],
            vec![9.0, 4.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            vec![(2, 2), (0, 3), (1, 5), (3, 6)],
        )
        .unwrap();
        assert_eq!(t.distance(1, 3).unwrap(), 1.0);
        assert_eq!(t.distance(0, 3).unwrap(), 4.0);
        assert_eq!(t.distance(2, 1).unwrap(), 9.0);
        assert_eq!(t.lca(5, 6), 4);
        assert_eq!(t.lca(3, 6), 1);
    }

    #[test]
    fn rejects_malformed_trees() {
        assert!(UltrametricTree::new(vec![], vec![], vec![]).is_err());
        // two roots
        assert!(UltrametricTree::new(vec![None, None], vec![0.0, 0.0], vec![(0, 0), (1, 1)]).is_err());
        // cycle
        assert!(UltrametricTree::new(
            vec![None, Some(2), Some(1)],
            vec![1.0, 1.0, 1.0],
            vec![]
        )
        .is_err());
        // internal node labeled zero
        assert!(UltrametricTree::new(vec![None, Some(0)], vec![0.0, 0.0], vec![(0, 1)]).is_err());
        // child label above parent
        assert!(UltrametricTree::new(
            vec![None, Some(0), Some(1), Some(0)],
            vec![1.0, 2.0, 0.0, 0.0],
            vec![(0, 2), (1, 3)]
        )
        .is_err());
        // leaf without point
        assert!(UltrametricTree::new(vec![None, Some(0), Some(0)], vec![1.0, 0.0, 0.0], vec![(0, 1)]).is_err());
        // duplicate point
        assert!(UltrametricTree::new(vec![None, Some(0), Some(0)], vec![1.0, 0.0, 0.0], vec![(0, 1), (0, 2)]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let t = two_leaves(8.0);
        let back = parse_ultrametric(&t.to_text()).unwrap();
        assert_eq!(back.to_text(), t.to_text());
        assert_eq!(back.distance(3, 7).unwrap(), 8.0);
        assert!(parse_ultrametric("ultrametric 2\n- 1 -\n").is_err());
        assert!(parse_ultrametric("tree 1\n- 0 0\n").is_err());
    }
}
