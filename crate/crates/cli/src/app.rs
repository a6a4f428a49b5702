use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ckr_core::rng::substream;
use ckr_core::{
    baswana_sen, build_oracle, build_oracle_with_beta, ckr_partition_graph, empirical_distortion, load_graph,
    sample_frt, sample_hierarchy, BottleneckTree, DistanceOracle, Error, ScaleFamily,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{bench_scaling, run_bench, BenchConfig};
use crate::generators::Family;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for bad input, 3 for a broken internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Invariant(_) | Error::Stalled { .. }) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "ckr", version, about = "CKR partitions, hierarchical partitions, tree embeddings and distance oracles")]
pub struct Cli {
    /// Report format; JSON lines unless a table is requested.
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one Δ-bounded partition.
    Partition {
        #[command(flatten)]
        io: GraphIo,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Sample a hierarchical partition.
    Hierarchy {
        #[command(flatten)]
        io: GraphIo,
        #[arg(long)]
        seed: u64,
        /// Comma-separated active vertices; all vertices by default.
        #[arg(long, value_delimiter = ',')]
        active: Option<Vec<usize>>,
    },
    /// Sample an ultrametric tree embedding, or measure distortion.
    Embed {
        #[command(flatten)]
        io: GraphIo,
        #[arg(long)]
        seed: u64,
        /// Report per-pair mean stretch over this many samples instead of
        /// writing a tree.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Build or query a distance oracle.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
    /// Extract a (2k−1)-spanner.
    Spanner {
        #[command(flatten)]
        io: GraphIo,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Count sampler work on generated graphs.
    Bench {
        /// cycle, grid, regular[D] or geometric.
        #[arg(long)]
        family: Family,
        /// Comma-separated sizes; `k` and `m` suffixes allowed.
        #[arg(long, value_delimiter = ',', value_parser = parse_size)]
        sizes: Vec<usize>,
        /// Runs per size.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 16.0)]
        delta: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Dump the processed scales of a graph: `j |V_j| |E_j| i_L i_R`.
    Scales {
        #[command(flatten)]
        io: GraphIo,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleAction {
    Build {
        #[command(flatten)]
        io: GraphIo,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        /// Padding parameter; defaults to 1/(32k).
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Answer `x y` pairs, one `x y estimate` line each.
    Query {
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct GraphIo {
    /// Edge-list file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_size(s: &str) -> std::result::Result<usize, String> {
    let s = s.trim();
    let (digits, mult) = match s.chars().last() {
        Some('k' | 'K') => (&s[..s.len() - 1], 1_000),
        Some('m' | 'M') => (&s[..s.len() - 1], 1_000_000),
        _ => (s, 1),
    };
    digits
        .parse::<usize>()
        .ok()
        .and_then(|d| d.checked_mul(mult))
        .ok_or_else(|| format!("bad size {s:?}"))
}

/// Parses a pairs file: one `x y` per line, `#` comments and blank lines
/// ignored.
pub fn parse_pairs(text: &str) -> ckr_core::Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = body.split_whitespace().collect();
        let parsed = match f[..] {
            [x, y] => x.parse::<usize>().ok().zip(y.parse::<usize>().ok()),
            _ => None,
        };
        pairs.push(parsed.ok_or_else(|| Error::Parse { line: i + 1, message: "expected \"x y\"".into() })?);
    }
    Ok(pairs)
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io { context: format!("reading {}", path.display()), source })
}

fn emit(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|source| CliError::Io { context: format!("writing {}", path.display()), source }),
        None => stdout
            .write_all(bytes)
            .map_err(|source| CliError::Io { context: "writing output".into(), source }),
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("reports serialize");
    s.push('\n');
    s
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells.zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        parts.join("  ") + "\n"
    };
    let mut out = line(&mut header.iter().copied());
    for row in rows {
        out += &line(&mut row.iter().map(String::as_str));
    }
    out
}

fn load(path: &Path) -> CliResult<ckr_core::WeightedGraph> {
    load_graph(path).map_err(|e| match e {
        Error::Io(source) => CliError::Io { context: format!("reading {}", path.display()), source },
        other => other.into(),
    })
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    #[serde(flatten)]
    fields: serde_json::Value,
}

fn summary(format: Format, command: &str, fields: serde_json::Value) -> String {
    match format {
        Format::Json => json_line(&Summary { command, fields }),
        Format::Table => {
            let map = fields.as_object().cloned().unwrap_or_default();
            let rows: Vec<Vec<String>> = map.into_iter().map(|(k, v)| vec![k, v.to_string()]).collect();
            table(&["field", "value"], &rows)
        }
    }
}

/// Runs one command, writing primary output to its `--out` file or `stdout`
/// and summaries to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let format = cli.format;
    match cli.command {
        Command::Partition { io, delta, seed } => {
            let g = load(&io.input)?;
            let (p, trace) = ckr_partition_graph(&g, delta, &mut substream(seed, "ckr", &[]))?;
            emit(io.out.as_deref(), p.to_text(seed).as_bytes(), stdout)?;
            if io.out.is_some() {
                let s = serde_json::json!({
                    "n": g.n(), "m": g.m(), "delta": delta, "radius": p.radius(),
                    "blocks": p.num_blocks(), "relaxations": trace.relaxations,
                    "queue_inserts": trace.queue_inserts,
                });
                emit(None, summary(format, "partition", s).as_bytes(), stdout)?;
            }
        }
        Command::Hierarchy { io, seed, active } => {
            let g = load(&io.input)?;
            let active = active.unwrap_or_else(|| (0..g.n()).collect());
            let h = sample_hierarchy(&g, &active, &mut substream(seed, "hierarchy", &[]))?;
            emit(io.out.as_deref(), h.tree.to_text().as_bytes(), stdout)?;
        }
        Command::Embed { io, seed, samples } => {
            let g = load(&io.input)?;
            match samples {
                None => {
                    let t = sample_frt(&g, &mut substream(seed, "frt", &[]))?;
                    emit(io.out.as_deref(), t.to_text().as_bytes(), stdout)?;
                }
                Some(samples) => {
                    let r = empirical_distortion(&g, samples, &mut substream(seed, "frt", &[]))?;
                    let text = match format {
                        Format::Json => {
                            let mut s = String::new();
                            for p in &r.pairs {
                                s += &json_line(&serde_json::json!({
                                    "x": p.x, "y": p.y, "distance": p.distance,
                                    "mean_tree_distance": p.mean_tree_distance,
                                    "mean_stretch": p.mean_stretch,
                                }));
                            }
                            s + &json_line(&serde_json::json!({
                                "samples": r.samples, "max_mean_stretch": r.max_mean_stretch,
                                "min_ratio": r.min_ratio,
                            }))
                        }
                        Format::Table => {
                            let rows: Vec<Vec<String>> = r
                                .pairs
                                .iter()
                                .map(|p| {
                                    vec![
                                        p.x.to_string(),
                                        p.y.to_string(),
                                        format!("{}", p.distance),
                                        format!("{:.4}", p.mean_tree_distance),
                                        format!("{:.4}", p.mean_stretch),
                                    ]
                                })
                                .collect();
                            table(&["x", "y", "distance", "mean_tree", "stretch"], &rows)
                                + &format!("max mean stretch {:.4} over {} samples\n", r.max_mean_stretch, r.samples)
                        }
                    };
                    emit(io.out.as_deref(), text.as_bytes(), stdout)?;
                }
            }
        }
        Command::Oracle { action: OracleAction::Build { io, k, seed, beta } } => {
            let g = load(&io.input)?;
            let o = match beta {
                Some(b) => build_oracle_with_beta(&g, k, b, seed)?,
                None => build_oracle(&g, k, seed)?,
            };
            let Some(out) = io.out.as_deref() else {
                return Err(CliError::Usage("oracle build requires --out".into()));
            };
            emit(Some(out), &o.to_bytes(), stdout)?;
            let s = serde_json::json!({
                "n": o.n(), "k": o.k(), "beta": o.beta(), "levels": o.levels().len(),
                "total_nodes": o.total_nodes(), "stretch_bound": o.stretch_bound(),
            });
            emit(None, summary(format, "oracle build", s).as_bytes(), stdout)?;
        }
        Command::Oracle { action: OracleAction::Query { oracle, pairs, out } } => {
            let o = DistanceOracle::from_bytes(&read(&oracle)?)?;
            let text = String::from_utf8(read(&pairs)?)
                .map_err(|_| CliError::Usage(format!("{} is not UTF-8", pairs.display())))?;
            let mut answer = String::new();
            for (x, y) in parse_pairs(&text)? {
                answer += &format!("{x} {y} {}\n", o.query(x, y)?);
            }
            emit(out.as_deref(), answer.as_bytes(), stdout)?;
        }
        Command::Spanner { io, k, seed } => {
            let g = load(&io.input)?;
            let s = baswana_sen(&g, k, &mut substream(seed, "spanner", &[]))?;
            emit(io.out.as_deref(), s.to_graph(g.n()).to_edge_list().as_bytes(), stdout)?;
            if io.out.is_some() {
                let sum = serde_json::json!({ "n": g.n(), "m": g.m(), "kept": s.len(), "k": k });
                emit(None, summary(format, "spanner", sum).as_bytes(), stdout)?;
            }
        }
        Command::Bench { family, sizes, seeds, delta, seed } => {
            let report = run_bench(&BenchConfig { family, sizes, seeds, delta, seed })?;
            let fit = (report.sizes().len() >= 3).then(|| bench_scaling(&report)).transpose()?;
            let text = match format {
                Format::Json => {
                    let mut s = String::new();
                    for r in &report.runs {
                        s += &json_line(&serde_json::json!({ "kind": "run", "family": report.family, "run": r }));
                    }
                    for z in report.sizes() {
                        s += &json_line(&serde_json::json!({ "kind": "size", "family": report.family, "size": z }));
                    }
                    if let Some(fit) = &fit {
                        s += &json_line(&serde_json::json!({ "kind": "scaling", "fit": fit }));
                    }
                    s
                }
                Format::Table => {
                    let rows: Vec<Vec<String>> = report
                        .sizes()
                        .iter()
                        .map(|z| {
                            vec![
                                z.n.to_string(),
                                format!("{:.0}", z.mean_m),
                                z.runs.to_string(),
                                format!("{:.1}", z.mean_relaxations),
                                format!("{:.1}", z.mean_queue_inserts),
                                format!("{:.3}", z.mean_wall_ms),
                            ]
                        })
                        .collect();
                    let mut s = table(&["n", "m", "runs", "relaxations", "queue_inserts", "wall_ms"], &rows);
                    if let Some(fit) = &fit {
                        s += &format!("slope {:.4}  r2 {:.4}  flag {}\n", fit.slope, fit.r_squared, fit.flag);
                    }
                    s
                }
            };
            emit(None, text.as_bytes(), stdout)?;
        }
        Command::Scales { io } => {
            let g = load(&io.input)?;
            let family = ScaleFamily::build(&g, &BottleneckTree::build(&g));
            emit(io.out.as_deref(), family.dump().as_bytes(), stdout)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_with_suffixes() {
        assert_eq!(parse_size("1k"), Ok(1000));
        assert_eq!(parse_size("100K"), Ok(100_000));
        assert_eq!(parse_size("2m"), Ok(2_000_000));
        assert_eq!(parse_size("17"), Ok(17));
        assert!(parse_size("k").is_err());
    }

    #[test]
    fn pairs_file() {
        assert_eq!(parse_pairs("# c\n0 1\n\n 2 3 \n").unwrap(), vec![(0, 1), (2, 3)]);
        assert!(matches!(parse_pairs("0 1\n0\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::Invariant("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::Disconnected).exit_code(), 2);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
