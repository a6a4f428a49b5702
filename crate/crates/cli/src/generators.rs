//! Synthetic graph families for benchmarks and tests.

use std::collections::HashSet;
use std::str::FromStr;

use ckr_core::{Error, Result, WeightedGraph};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Cycle,
    Grid,
    Regular(usize),
    Geometric,
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cycle" => Ok(Family::Cycle),
            "grid" => Ok(Family::Grid),
            "regular" => Ok(Family::Regular(4)),
            "geometric" => Ok(Family::Geometric),
            _ => match s.strip_prefix("regular") {
                Some(d) => d.parse().map(Family::Regular).map_err(|_| format!("bad degree in {s:?}")),
                None => Err(format!("unknown family {s:?} (cycle, grid, regular[D], geometric)")),
            },
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Cycle => write!(f, "cycle"),
            Family::Grid => write!(f, "grid"),
            Family::Regular(d) => write!(f, "regular{d}"),
            Family::Geometric => write!(f, "geometric"),
        }
    }
}

impl Family {
    pub fn generate<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> Result<WeightedGraph> {
        match self {
            Family::Cycle => cycle(n),
            Family::Grid => grid(n),
            Family::Regular(d) => random_regular(n, d, rng),
            Family::Geometric => random_geometric(n, rng),
        }
    }
}

/// Unit-weight cycle on `n >= 3` vertices.
pub fn cycle(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::InvalidArgument("a cycle needs at least 3 vertices".into()));
    }
    WeightedGraph::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)))
}

/// Unit-weight square grid with `⌊√n⌋²` vertices.
pub fn grid(n: usize) -> Result<WeightedGraph> {
    let side = (n as f64).sqrt() as usize;
    if side < 2 {
        return Err(Error::InvalidArgument("a grid needs at least 4 vertices".into()));
    }
    let id = |r: usize, c: usize| r * side + c;
    let mut edges = Vec::with_capacity(2 * side * side);
    for r in 0..side {
        for c in 0..side {
            if c + 1 < side {
                edges.push((id(r, c), id(r, c + 1), 1.0));
            }
            if r + 1 < side {
                edges.push((id(r, c), id(r + 1, c), 1.0));
            }
        }
    }
    WeightedGraph::new(side * side, edges)
}

/// Uniform simple connected `d`-regular graph with unit weights, by the
/// pairing model with rejection.
pub fn random_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<WeightedGraph> {
    if d == 0 || d >= n || (n * d) % 2 == 1 {
        return Err(Error::InvalidArgument(format!("no simple {d}-regular graph on {n} vertices")));
    }
    const ATTEMPTS: usize = 10_000;
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..ATTEMPTS {
        stubs.shuffle(rng);
        let mut seen = HashSet::with_capacity(n * d / 2);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
        }
        let g = WeightedGraph::new(n, seen.into_iter().map(|(u, v)| (u, v, 1.0)))?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::InvalidArgument(format!("no connected simple {d}-regular graph found on {n} vertices")))
}

/// Points uniform in the unit square joined when closer than
/// `sqrt(2 ln n / n)`; weights are Euclidean lengths.
pub fn random_geometric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::InvalidArgument("a geometric graph needs at least 2 vertices".into()));
    }
    let radius = (2.0 * (n as f64).ln() / n as f64).sqrt().min(1.5);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let cells = ((1.0 / radius) as usize).max(1);
    let cell = |x: f64| ((x * cells as f64) as usize).min(cells - 1);
    let mut buckets = vec![Vec::new(); cells * cells];
    for (i, &(x, y)) in pts.iter().enumerate() {
        buckets[cell(x) * cells + cell(y)].push(i);
    }
    let mut edges = Vec::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let (cx, cy) = (cell(x), cell(y));
        for nx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
            for ny in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
                for &j in &buckets[nx * cells + ny] {
                    if j > i {
                        let d = ((x - pts[j].0).powi(2) + (y - pts[j].1).powi(2)).sqrt();
                        if d <= radius && d > 0.0 {
                            edges.push((i, j, d));
                        }
                    }
                }
            }
        }
    }
    WeightedGraph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ckr_core::rng::master;

    #[test]
    fn shapes() {
        let c = cycle(10).unwrap();
        assert_eq!((c.n(), c.m()), (10, 10));
        let g = grid(17).unwrap();
        assert_eq!((g.n(), g.m()), (16, 24));
        let r = random_regular(100, 4, &mut master(1)).unwrap();
        assert_eq!(r.m(), 200);
        assert!((0..100).all(|v| r.degree(v) == 4));
        let geo = random_geometric(500, &mut master(2)).unwrap();
        assert_eq!(geo.n(), 500);
        assert!(geo.m() > 500);
    }

    #[test]
    fn family_names() {
        assert_eq!("regular6".parse::<Family>().unwrap(), Family::Regular(6));
        assert_eq!("regular".parse::<Family>().unwrap(), Family::Regular(4));
        assert!("tree".parse::<Family>().is_err());
        assert_eq!(Family::Regular(4).to_string(), "regular4");
    }

    #[test]
    fn impossible_regular_rejected() {
        assert!(random_regular(5, 3, &mut master(0)).is_err());
        assert!(random_regular(4, 4, &mut master(0)).is_err());
    }
}
