use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use apgraph::data::{read_dense, read_gt};
use tempfile::TempDir;

fn apgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apgraph"))
        .args(args)
        .output()
        .expect("failed to run apgraph")
}

fn ok(args: &[&str]) -> String {
    let out = apgraph(args);
    assert!(
        out.status.success(),
        "apgraph {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, name: &str, dim: usize, n: usize, seed: u64) -> PathBuf {
    let p = path(dir, name);
    ok(&[
        "gen", "--dim", &dim.to_string(), "--n", &n.to_string(),
        "--seed", &seed.to_string(), "--out", s(&p),
    ]);
    p
}

#[test]
fn gen_writes_expected_size_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = gen(&dir, "a.rvec", 16, 100, 7);
    let b = gen(&dir, "b.rvec", 16, 100, 7);
    let c = gen(&dir, "c.rvec", 16, 100, 8);
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes.len(), 16 + 6400);
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_ne!(bytes, std::fs::read(&c).unwrap());
    let data = read_dense(&a).unwrap();
    assert!(data.as_flat().iter().all(|&x| (0.0..1.0).contains(&x)));
}

#[test]
fn gen_rejects_zero_dim() {
    let dir = TempDir::new().unwrap();
    let out = apgraph(&["gen", "--dim", "0", "--n", "10", "--out", s(&path(&dir, "x"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_arguments_are_usage_errors() {
    assert_eq!(apgraph(&["gen", "--dim", "4"]).status.code(), Some(1));
    assert_eq!(apgraph(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(apgraph(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_dataset_is_a_format_error() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.rvec");
    std::fs::write(&bad, b"NOPE....").unwrap();
    let out = apgraph(&["build", "--dataset", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let missing = apgraph(&["build", "--dataset", s(&path(&dir, "missing"))]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn gt_of_dataset_items_finds_themselves() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.rvec", 8, 200, 1);
    let gt = path(&dir, "d.gt");
    ok(&["gt", "--dataset", s(&data), "--queries", s(&data), "--k", "5", "--out", s(&gt)]);
    let gt = read_gt(&gt).unwrap();
    assert_eq!((gt.k(), gt.len()), (5, 200));
    for q in 0..gt.len() {
        let row = gt.row(q);
        assert_eq!(row[0].id as usize, q);
        assert_eq!(row[0].dist, 0.0);
        assert!(row.windows(2).all(|w| w[0].dist <= w[1].dist));
    }
}

#[test]
fn gt_with_k_above_n_fails() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.rvec", 4, 10, 1);
    let out = apgraph(&[
        "gt", "--dataset", s(&data), "--queries", s(&data), "--k", "11",
        "--out", s(&path(&dir, "x.gt")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_single_configuration() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.rvec", 4, 50, 1);
    let queries = gen(&dir, "q.rvec", 4, 1, 2);
    let gt = path(&dir, "q.gt");
    ok(&["gt", "--dataset", s(&data), "--queries", s(&queries), "--k", "50", "--out", s(&gt)]);
    let csv = path(&dir, "r.csv");
    ok(&[
        "bench", "--dataset", s(&data), "--queries", s(&queries), "--gt", s(&gt),
        "--k", "50", "--variant", "apg-star", "--n-links", "8", "--out", s(&csv),
    ]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "name,recall,qps,mean_dist_evals,mean_hops");
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[1].parse::<f64>().unwrap(), 1.0);
    assert!(path(&dir, "r.txt").exists());
}

#[test]
fn bench_grid_and_k_mismatch() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.rvec", 8, 500, 1);
    let queries = gen(&dir, "q.rvec", 8, 10, 2);
    let gt = path(&dir, "q.gt");
    ok(&["gt", "--dataset", s(&data), "--queries", s(&queries), "--k", "10", "--out", s(&gt)]);
    let csv = path(&dir, "r.csv");
    ok(&[
        "bench", "--dataset", s(&data), "--queries", s(&queries), "--gt", s(&gt), "--k", "10",
        "--variant", "apg-star,beam", "--beam", "8", "--n-links", "8,16", "--out", s(&csv),
    ]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 4);
    for line in text.lines().skip(1) {
        let recall: f64 = line.rsplitn(5, ',').nth(3).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&recall));
    }

    let out = apgraph(&[
        "bench", "--dataset", s(&data), "--queries", s(&queries), "--gt", s(&gt), "--k", "5",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn search_saved_graph() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.rvec", 6, 300, 1);
    let graph = path(&dir, "g.apg");
    ok(&[
        "build", "--dataset", s(&data), "--variant", "beam", "--beam", "8",
        "--n-links", "8", "--out", s(&graph),
    ]);

    let nearest = ok(&[
        "search", "--graph", s(&graph), "--dataset", s(&data), "--query-id", "17",
        "--k", "1", "--variant", "beam", "--beam", "8",
    ]);
    let first = nearest.lines().find(|l| !l.starts_with('#') && !l.starts_with("rank")).unwrap();
    let cols: Vec<&str> = first.split('\t').collect();
    assert_eq!(cols[1], "17");
    assert_eq!(cols[2].parse::<f64>().unwrap(), 0.0);

    let all = ok(&[
        "search", "--graph", s(&graph), "--dataset", s(&data), "--query-id", "0", "--k", "300",
    ]);
    let mut ids: Vec<usize> = all
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("rank"))
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ids.len(), 300);
    ids.sort_unstable();
    assert!(ids.iter().copied().eq(0..300));
    let stats = all.lines().find(|l| l.starts_with('#')).unwrap();
    let evals: usize = stats
        .split_whitespace()
        .find_map(|t| t.strip_prefix("distance_evaluations="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(evals <= 300);
}
