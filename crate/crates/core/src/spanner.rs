//! Randomized `(2k−1)`-spanners by cluster sampling.
//!
//! Each of `k−1` rounds keeps every current cluster with probability
//! `n^{-1/k}`. A vertex with no edge into a kept cluster adds its lightest
//! edge to every neighboring cluster and drops out; otherwise it joins the
//! kept cluster of its lightest such edge and also adds the lightest edge to
//! each neighboring cluster that is strictly closer. A final pass adds, for
//! every vertex, the lightest edge to each neighboring cluster.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, VertexId, WeightedGraph};

const NONE: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct Spanner {
    pub kept: Vec<Edge>,
    pub k: usize,
}

impl Spanner {
    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    pub fn stretch(&self) -> usize {
        2 * self.k - 1
    }

    pub fn to_graph(&self, n: usize) -> WeightedGraph {
        WeightedGraph::from_normalized(n, self.kept.clone())
    }
}

// Lightest live edge from v into each neighboring cluster, keyed by cluster:
// (weight, neighbor, edge id).
fn lightest_per_cluster(
    adj: &[(VertexId, f64, usize)],
    alive: &[bool],
    cluster: &[usize],
) -> BTreeMap<usize, (f64, VertexId, usize)> {
    let mut best: BTreeMap<usize, (f64, VertexId, usize)> = BTreeMap::new();
    for &(u, w, id) in adj {
        if !alive[id] || cluster[u] == NONE {
            continue;
        }
        best.entry(cluster[u])
            .and_modify(|cur| {
                if (w, u) < (cur.0, cur.1) {
                    *cur = (w, u, id);
                }
            })
            .or_insert((w, u, id));
    }
    best
}

pub fn baswana_sen<R: Rng + ?Sized>(g: &WeightedGraph, k: usize, rng: &mut R) -> Result<Spanner> {
    if k == 0 {
        return Err(Error::invalid("spanner parameter k must be at least 1"));
    }
    let n = g.n();
    let edges = g.edges();
    let mut adj: Vec<Vec<(VertexId, f64, usize)>> = vec![Vec::new(); n];
    for (id, e) in edges.iter().enumerate() {
        adj[e.u].push((e.v, e.w, id));
        adj[e.v].push((e.u, e.w, id));
    }
    let mut alive = vec![true; edges.len()];
    let mut keep = vec![false; edges.len()];
    let mut cluster: Vec<usize> = (0..n).collect();
    let p = (n.max(1) as f64).powf(-1.0 / k as f64);

    for _ in 1..k {
        let mut centers: Vec<usize> = cluster.iter().copied().filter(|&c| c != NONE).collect();
        centers.sort_unstable();
        centers.dedup();
        let mut sampled = vec![false; n];
        for c in centers {
            sampled[c] = rng.gen_bool(p);
        }
        let mut next: Vec<usize> = cluster.iter().map(|&c| if c != NONE && sampled[c] { c } else { NONE }).collect();
        let mut dead: Vec<(VertexId, usize)> = Vec::new();
        for v in 0..n {
            if cluster[v] == NONE || sampled[cluster[v]] {
                continue;
            }
            let best = lightest_per_cluster(&adj[v], &alive, &cluster);
            let nearest = best
                .iter()
                .filter(|(&c, _)| sampled[c])
                .min_by(|a, b| (a.1 .0, a.1 .1).partial_cmp(&(b.1 .0, b.1 .1)).unwrap())
                .map(|(&c, &e)| (c, e));
            match nearest {
                None => {
                    for (&c, &(_, _, id)) in &best {
                        keep[id] = true;
                        dead.push((v, c));
                    }
                }
                Some((joined, (w, u, id))) => {
                    keep[id] = true;
                    next[v] = joined;
                    dead.push((v, joined));
                    for (&c, &(wc, uc, idc)) in &best {
                        if (wc, uc) < (w, u) {
                            keep[idc] = true;
                            dead.push((v, c));
                        }
                    }
                }
            }
        }
        for (v, c) in dead {
            for &(u, _, id) in &adj[v] {
                if cluster[u] == c {
                    alive[id] = false;
                }
            }
        }
        cluster = next;
        for (id, e) in edges.iter().enumerate() {
            if alive[id] && (cluster[e.u] == NONE || cluster[e.v] == NONE || cluster[e.u] == cluster[e.v]) {
                alive[id] = false;
            }
        }
    }

    for incident in &adj {
        for (_, (_, _, id)) in lightest_per_cluster(incident, &alive, &cluster) {
            keep[id] = true;
        }
    }
    let kept = edges.iter().zip(&keep).filter(|(_, &k)| k).map(|(e, _)| *e).collect();
    Ok(Spanner { kept, k })
}
