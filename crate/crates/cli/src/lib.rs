//! Command-line front end: graph generators, the sampler benchmark, and
//! subcommand dispatch for the `ckr` binary.

pub mod app;
pub mod bench;
pub mod generators;

pub use app::{parse_pairs, run, Cli, CliError, Format};
pub use bench::{bench_scaling, run_bench, BenchConfig, BenchReport, BenchRun, ScalingFit};
pub use generators::Family;
