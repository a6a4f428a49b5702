//! Work-counting benchmark of the graph sampler.

use std::time::Instant;

use ckr_core::rng::substream;
use ckr_core::{ckr_partition_graph, Error, Result};
use serde::{Deserialize, Serialize};

use crate::generators::Family;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    pub seed_index: u64,
    pub wall_ms: f64,
    pub relaxations: u64,
    pub queue_inserts: u64,
    pub relaxations_per_edge: f64,
    pub relaxations_per_vertex: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub mean_m: f64,
    pub runs: usize,
    pub mean_relaxations: f64,
    pub mean_queue_inserts: f64,
    pub mean_wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub family: String,
    pub delta: f64,
    pub runs: Vec<BenchRun>,
}

impl BenchReport {
    /// Per-size means, in order of first appearance.
    pub fn sizes(&self) -> Vec<SizeSummary> {
        let mut order: Vec<usize> = Vec::new();
        for r in &self.runs {
            if !order.contains(&r.n) {
                order.push(r.n);
            }
        }
        order
            .into_iter()
            .map(|n| {
                let runs: Vec<&BenchRun> = self.runs.iter().filter(|r| r.n == n).collect();
                let k = runs.len() as f64;
                let mean = |f: &dyn Fn(&BenchRun) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / k;
                SizeSummary {
                    n,
                    mean_m: mean(&|r| r.m as f64),
                    runs: runs.len(),
                    mean_relaxations: mean(&|r| r.relaxations as f64),
                    mean_queue_inserts: mean(&|r| r.queue_inserts as f64),
                    mean_wall_ms: mean(&|r| r.wall_ms),
                }
            })
            .collect()
    }
}

pub struct BenchConfig {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub seeds: u64,
    pub delta: f64,
    pub seed: u64,
}

/// Generates one graph per `(size, seed index)` and samples one partition on
/// it, recording the sampler's own counters.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.sizes.is_empty() || cfg.seeds == 0 {
        return Err(Error::InvalidArgument("bench needs at least one size and one seed".into()));
    }
    let mut runs = Vec::new();
    for &size in &cfg.sizes {
        for s in 0..cfg.seeds {
            let g = cfg.family.generate(size, &mut substream(cfg.seed, "bench.graph", &[size as u64, s]))?;
            let mut rng = substream(cfg.seed, "bench.ckr", &[size as u64, s]);
            let start = Instant::now();
            let (_, trace) = ckr_partition_graph(&g, cfg.delta, &mut rng)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            runs.push(BenchRun {
                n: g.n(),
                m: g.m(),
                delta: cfg.delta,
                seed_index: s,
                wall_ms,
                relaxations: trace.relaxations,
                queue_inserts: trace.queue_inserts,
                relaxations_per_edge: trace.relaxations as f64 / g.m().max(1) as f64,
                relaxations_per_vertex: trace.relaxations as f64 / g.n() as f64,
            });
        }
    }
    Ok(BenchReport { family: cfg.family.to_string(), delta: cfg.delta, runs })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Least-squares slope of mean relaxations against `m·log₂ n`, through
    /// the origin.
    pub slope: f64,
    pub r_squared: f64,
    /// Mean relaxations divided by `m·log₂ n`, per size in ascending `n`.
    pub ratios: Vec<(usize, f64)>,
    /// Raised when the largest size's ratio exceeds twice the smallest's.
    pub flag: bool,
}

pub fn bench_scaling(report: &BenchReport) -> Result<ScalingFit> {
    let mut sizes = report.sizes();
    sizes.sort_by_key(|s| s.n);
    if sizes.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "scaling fit needs at least 3 sizes, got {}",
            sizes.len()
        )));
    }
    let pts: Vec<(usize, f64, f64)> = sizes
        .iter()
        .map(|s| (s.n, s.mean_m * (s.n as f64).log2(), s.mean_relaxations))
        .collect();
    if pts.iter().any(|&(_, x, _)| x.is_nan() || x <= 0.0) {
        return Err(Error::InvalidArgument("every size needs n >= 2 and at least one edge".into()));
    }
    let sxy: f64 = pts.iter().map(|&(_, x, y)| x * y).sum();
    let sxx: f64 = pts.iter().map(|&(_, x, _)| x * x).sum();
    let slope = sxy / sxx;
    let mean_y = pts.iter().map(|p| p.2).sum::<f64>() / pts.len() as f64;
    let ss_res: f64 = pts.iter().map(|&(_, x, y)| (y - slope * x).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|&(_, _, y)| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let ratios: Vec<(usize, f64)> = pts.iter().map(|&(n, x, y)| (n, y / x)).collect();
    let flag = ratios.last().unwrap().1 > 2.0 * ratios[0].1;
    Ok(ScalingFit { slope, r_squared, ratios, flag })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64, f64) -> f64) -> BenchReport {
        let runs = [1000usize, 10_000, 100_000]
            .iter()
            .map(|&n| {
                let m = 2 * n;
                BenchRun {
                    n,
                    m,
                    delta: 16.0,
                    seed_index: 0,
                    wall_ms: 0.0,
                    relaxations: f(n as f64, m as f64) as u64,
                    queue_inserts: 0,
                    relaxations_per_edge: 0.0,
                    relaxations_per_vertex: 0.0,
                }
            })
            .collect();
        BenchReport { family: "synthetic".into(), delta: 16.0, runs }
    }

    #[test]
    fn linearithmic_counts_clear_the_flag() {
        let fit = bench_scaling(&synthetic(|n, m| 3.0 * m * n.log2())).unwrap();
        assert!(!fit.flag);
        assert!((fit.slope - 3.0).abs() < 1e-3);
        assert!(fit.r_squared > 0.999);
    }

    #[test]
    fn quadratic_counts_raise_the_flag() {
        assert!(bench_scaling(&synthetic(|_, m| m * m)).unwrap().flag);
    }

    #[test]
    fn too_few_sizes() {
        let mut r = synthetic(|_, m| m);
        r.runs.truncate(2);
        assert!(bench_scaling(&r).is_err());
    }

    #[test]
    fn counters_come_from_the_sampler() {
        let cfg = BenchConfig { family: Family::Cycle, sizes: vec![50, 100], seeds: 2, delta: 8.0, seed: 1 };
        let report = run_bench(&cfg).unwrap();
        assert_eq!(report.runs.len(), 4);
        let again = run_bench(&cfg).unwrap();
        for (a, b) in report.runs.iter().zip(&again.runs) {
            assert_eq!((a.relaxations, a.queue_inserts), (b.relaxations, b.queue_inserts));
            assert!(a.relaxations >= a.m as u64);
        }
    }
}
