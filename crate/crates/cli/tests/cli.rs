use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ckr"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ckr-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn partition_of_short_path_is_one_block() {
    let dir = scratch("partition");
    let g = write(&dir, "p3.txt", "# path\n3\n0 1 1\n1 2 1\n");
    let out = run(&["partition", "--input", s(&g), "--delta", "8", "--seed", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let record = ckr_core::parse_partition(&text).unwrap();
    assert_eq!(record.seed, 7);
    assert!(record.blocks.iter().all(|&b| b == record.blocks[0]));
}

#[test]
fn equal_seeds_give_identical_files() {
    let dir = scratch("determinism");
    let g = write(&dir, "c.txt", &(0..20).fold("20\n".to_string(), |acc, i| acc + &format!("{i} {} {}\n", (i + 1) % 20, 1 + i % 4)));
    for cmd in [
        vec!["partition", "--delta", "6"],
        vec!["hierarchy"],
        vec!["embed"],
        vec!["spanner", "--k", "2"],
    ] {
        let mut files = Vec::new();
        for run_idx in 0..2 {
            let out = dir.join(format!("{}-{run_idx}.txt", cmd[0]));
            let mut args = cmd.clone();
            args.extend(["--input", s(&g), "--seed", "42", "--out", s(&out)]);
            let o = run(&args);
            assert!(o.status.success(), "{cmd:?}: {}", String::from_utf8_lossy(&o.stderr));
            files.push(std::fs::read(&out).unwrap());
        }
        assert_eq!(files[0], files[1], "{cmd:?}");
    }
    let mut snapshots = Vec::new();
    for run_idx in 0..2 {
        let out = dir.join(format!("o-{run_idx}.bin"));
        let o = run(&["oracle", "build", "--input", s(&g), "--k", "2", "--seed", "3", "--out", s(&out)]);
        assert!(o.status.success());
        snapshots.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn oracle_build_and_query() {
    let dir = scratch("oracle");
    let g = write(&dir, "g.txt", "4\n0 1 1\n1 2 2\n2 3 1\n3 0 5\n");
    let o = dir.join("o.bin");
    let built = run(&["oracle", "build", "--input", s(&g), "--k", "1", "--seed", "9", "--out", s(&o)]);
    assert!(built.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&built.stdout).unwrap();
    assert_eq!(summary["stretch_bound"], 256.0);
    let pairs = write(&dir, "pairs.txt", "# x y\n0 2\n3 3\n");
    let q = run(&["oracle", "query", "--oracle", s(&o), "--pairs", s(&pairs)]);
    assert!(q.status.success());
    let text = String::from_utf8(q.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let est: f64 = lines[0].split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((3.0..=768.0).contains(&est));
    assert_eq!(lines[1], "3 3 0");
    let bad = write(&dir, "bad.txt", "0 9\n");
    assert_eq!(run(&["oracle", "query", "--oracle", s(&o), "--pairs", s(&bad)]).status.code(), Some(2));
}

#[test]
fn input_errors_exit_with_2() {
    let dir = scratch("errors");
    let bad = write(&dir, "bad.txt", "2\n0 1 -3\n");
    let out = run(&["partition", "--input", s(&bad), "--delta", "1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let missing = run(&["partition", "--input", "/nonexistent/g.txt", "--delta", "1", "--seed", "1"]);
    assert_eq!(missing.status.code(), Some(2));
    // seed is mandatory for randomized subcommands
    let g = write(&dir, "g.txt", "2\n0 1 1\n");
    assert_eq!(run(&["partition", "--input", s(&g), "--delta", "1"]).status.code(), Some(2));
    let disc = write(&dir, "d.txt", "3\n0 1 1\n");
    assert_eq!(run(&["embed", "--input", s(&disc), "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn bench_reports_json_lines() {
    let out = run(&["bench", "--family", "cycle", "--sizes", "100,200,400", "--seeds", "2", "--seed", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.iter().filter(|l| l["kind"] == "run").count(), 6);
    assert_eq!(lines.iter().filter(|l| l["kind"] == "size").count(), 3);
    assert_eq!(lines.last().unwrap()["kind"], "scaling");
    let table = run(&["--format", "table", "bench", "--family", "grid", "--sizes", "100", "--seeds", "1", "--seed", "5"]);
    assert!(String::from_utf8(table.stdout).unwrap().starts_with("  n"));
}

#[test]
fn distortion_report_and_scales_dump() {
    let dir = scratch("embed");
    let g = write(&dir, "g.txt", "3\n0 1 1\n1 2 1\n");
    let out = run(&["embed", "--input", s(&g), "--seed", "2", "--samples", "50"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert!(last["max_mean_stretch"].as_f64().unwrap() >= 1.0);
    assert_eq!(text.lines().count(), 4);
    let single = write(&dir, "e.txt", "2\n0 1 3\n");
    let dump = run(&["scales", "--input", s(&single)]);
    assert_eq!(String::from_utf8(dump.stdout).unwrap(), "1 2 1 1 1\n");
}
