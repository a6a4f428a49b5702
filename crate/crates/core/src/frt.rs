//! Sampling tree embeddings and measuring their distortion.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{exact_metric, WeightedGraph};
use crate::hierarchy::{hierarchy_to_ultrametric, sample_hierarchy_in, Multiscale};
use crate::ultrametric::UltrametricTree;

/// Samples an ultrametric that dominates the shortest-path metric of `g`.
pub fn sample_frt<R: Rng + ?Sized>(g: &WeightedGraph, rng: &mut R) -> Result<UltrametricTree> {
    check_connected(g)?;
    sample_frt_in(&Multiscale::new(g), rng)
}

/// [`sample_frt`] over a prebuilt [`Multiscale`] of a connected graph.
pub fn sample_frt_in<R: Rng + ?Sized>(ms: &Multiscale, rng: &mut R) -> Result<UltrametricTree> {
    let all: Vec<usize> = (0..ms.n()).collect();
    let sampled = sample_hierarchy_in(ms, &all, rng)?;
    Ok(hierarchy_to_ultrametric(&sampled.tree))
}

fn check_connected(g: &WeightedGraph) -> Result<()> {
    if g.n() == 0 {
        return Err(Error::invalid("graph has no vertices"));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairStretch {
    pub x: usize,
    pub y: usize,
    pub distance: f64,
    pub mean_tree_distance: f64,
    pub mean_stretch: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistortionReport {
    pub samples: usize,
    pub pairs: Vec<PairStretch>,
    /// Largest per-pair mean stretch: the empirical distortion.
    pub max_mean_stretch: f64,
    /// Smallest `ν/ρ` seen in any sample; at least 1 by dominance.
    pub min_ratio: f64,
}

/// Draws `samples` trees and reports per-pair mean stretch `E[ν]/ρ`.
/// A sample that contracts any pair is reported as an invariant violation.
pub fn empirical_distortion<R: Rng + ?Sized>(
    g: &WeightedGraph,
    samples: usize,
    rng: &mut R,
) -> Result<DistortionReport> {
    check_connected(g)?;
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    let n = g.n();
    let metric = exact_metric(g);
    let ms = Multiscale::new(g);
    let mut sums = vec![0.0; n * (n - 1) / 2];
    let mut min_ratio = f64::INFINITY;
    for _ in 0..samples {
        let tree = sample_frt_in(&ms, rng)?;
        let leaves: Vec<usize> = (0..n).map(|x| tree.leaf(x).expect("every vertex is a leaf")).collect();
        let mut k = 0;
        for x in 0..n {
            for y in x + 1..n {
                let nu = tree.node_distance(leaves[x], leaves[y]);
                let rho = metric.get(x, y);
                if nu < rho {
                    return Err(Error::Invariant(format!(
                        "tree distance {nu} below graph distance {rho} for pair ({x}, {y})"
                    )));
                }
                min_ratio = min_ratio.min(nu / rho);
                sums[k] += nu;
                k += 1;
            }
        }
    }
    let mut pairs = Vec::with_capacity(sums.len());
    let mut k = 0;
    for x in 0..n {
        for y in x + 1..n {
            let distance = metric.get(x, y);
            let mean = sums[k] / samples as f64;
            pairs.push(PairStretch { x, y, distance, mean_tree_distance: mean, mean_stretch: mean / distance });
            k += 1;
        }
    }
    let max_mean_stretch = pairs.iter().map(|p| p.mean_stretch).fold(1.0, f64::max);
    Ok(DistortionReport { samples, pairs, max_mean_stretch, min_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::master;

    #[test]
    fn single_vertex() {
        let g = WeightedGraph::new(1, []).unwrap();
        let t = sample_frt(&g, &mut master(0)).unwrap();
        assert_eq!(t.num_nodes(), 1);
        assert_eq!(t.distance(0, 0).unwrap(), 0.0);
    }

    #[test]
    fn disconnected_rejected() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(sample_frt(&g, &mut master(0)), Err(Error::Disconnected)));
    }

    #[test]
    fn two_points_within_factor_32() {
        for d in [0.001, 0.5, 1.0, 3.0, 1e6] {
            let g = WeightedGraph::new(2, [(0, 1, d)]).unwrap();
            let r = empirical_distortion(&g, 200, &mut master(9)).unwrap();
            assert!(r.max_mean_stretch >= 1.0 && r.max_mean_stretch <= 32.0);
            assert!(r.min_ratio >= 1.0);
        }
    }

    #[test]
    fn path_dominance() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        for seed in 0..100 {
            let t = sample_frt(&g, &mut master(seed)).unwrap();
            assert!(t.distance(0, 1).unwrap() >= 1.0);
            assert!(t.distance(0, 2).unwrap() >= 2.0);
            assert_eq!(t.distance(2, 0).unwrap(), t.distance(0, 2).unwrap());
        }
    }

    #[test]
    fn equal_seeds_equal_reports() {
        let g = WeightedGraph::new(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0 + i as f64))).unwrap();
        let a = empirical_distortion(&g, 30, &mut master(4)).unwrap();
        let b = empirical_distortion(&g, 30, &mut master(4)).unwrap();
        assert_eq!(a, b);
    }
}
