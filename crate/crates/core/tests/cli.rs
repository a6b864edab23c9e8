mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::write_synthetic_dataset;
use wavechar::dataset::read_embeddings;

fn wavechar<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_wavechar"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn embed_single_edge_graph() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("graphs.json"), r#"{"0": [[0, 1]]}"#).unwrap();
    let csv = dir.path().join("emb.csv");
    let out = wavechar(["embed", "--input", path(dir.path()), "--output", path(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = read_embeddings(&csv).unwrap();
    assert_eq!(table.ids, ["0"]);
    // structural fallback gives two features
    assert_eq!(table.rows[0].len(), 1000);
}

#[test]
fn embed_with_explicit_features() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("graphs.json"), r#"{"a": [[0, 1], [1, 2]]}"#).unwrap();
    std::fs::write(dir.path().join("features.json"), r#"{"a": [[0.5], [1.0], [-1.0]]}"#).unwrap();
    let csv = dir.path().join("emb.csv");
    let out = wavechar(["embed", "--input", path(dir.path()), "--output", path(&csv), "--kmax", "2", "--d", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(read_embeddings(&csv).unwrap().rows[0].len(), 2 * 2 * 3 * 2);
}

#[test]
fn missing_graphs_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavechar(["embed", "--input", path(dir.path()), "--output", path(&dir.path().join("x.csv"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("graphs.json"), "{}", stderr(&out));
}

#[test]
fn invalid_parameters_and_flags_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_dataset(dir.path(), 4, 0);
    let csv = dir.path().join("x.csv");
    for bad in [["--tau", "0"], ["--kmax", "0"], ["--d", "0"], ["--bogus", "1"]] {
        let mut args = vec!["embed", "--input", path(dir.path()), "--output", path(&csv)];
        args.extend(bad);
        let out = wavechar(&args);
        assert_eq!(out.status.code(), Some(1), "{bad:?}: {}", stderr(&out));
    }
    assert_eq!(wavechar(["frobnicate"]).status.code(), Some(1));
    assert_eq!(wavechar(["--help"]).status.code(), Some(0));
}

fn write_table(dir: &Path, rows: &[(&str, [f64; 2], u8)]) -> (String, String) {
    let emb = dir.join("emb.csv");
    let target = dir.join("target.csv");
    let mut e = String::from("id,x0,x1\n");
    let mut t = String::from("id,target\n");
    for (id, x, y) in rows {
        e.push_str(&format!("{id},{},{}\n", x[0], x[1]));
        t.push_str(&format!("{id},{y}\n"));
    }
    std::fs::write(&emb, e).unwrap();
    std::fs::write(&target, t).unwrap();
    (path(&emb).to_owned(), path(&target).to_owned())
}

#[test]
fn evaluate_constant_embeddings_gives_chance() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<(String, [f64; 2], u8)> = (0..20).map(|i| (i.to_string(), [1.0, 1.0], (i % 2) as u8)).collect();
    let rows: Vec<(&str, [f64; 2], u8)> = rows.iter().map(|(id, x, y)| (id.as_str(), *x, *y)).collect();
    let (emb, target) = write_table(dir.path(), &rows);
    let out = wavechar(["evaluate", "--embeddings", &emb, "--target", &target]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("0.500 ± 0.000"), "{}", stdout(&out));
}

#[test]
fn evaluate_separable_embeddings_gives_perfect_auc() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<(String, [f64; 2], u8)> = (0..40)
        .map(|i| {
            let y = (i % 2) as u8;
            let x = if y == 1 { 3.0 + i as f64 * 0.01 } else { -3.0 - i as f64 * 0.01 };
            (format!("g{i}"), [x, 0.5], y)
        })
        .collect();
    let rows: Vec<(&str, [f64; 2], u8)> = rows.iter().map(|(id, x, y)| (id.as_str(), *x, *y)).collect();
    let (emb, target) = write_table(dir.path(), &rows);
    let out = wavechar(["evaluate", "--embeddings", &emb, "--target", &target, "--per-seed"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("1.000 ± 0.000"), "{text}");
    // summary line, CSV header, ten seeds
    assert_eq!(text.lines().count(), 12, "{text}");
}

#[test]
fn evaluate_rejects_missing_labels() {
    let dir = tempfile::tempdir().unwrap();
    let (emb, target) = write_table(dir.path(), &[("a", [0.0, 1.0], 0), ("b", [1.0, 0.0], 1)]);
    std::fs::write(&target, "id,target\na,0\nc,1\n").unwrap();
    let out = wavechar(["evaluate", "--embeddings", &emb, "--target", &target]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("\"b\""), "{}", stderr(&out));
}

#[test]
fn run_equals_embed_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_dataset(dir.path(), 30, 11);
    let input = path(dir.path());
    let csv = dir.path().join("emb.csv");
    let run = wavechar(["run", "--input", input, "--output", path(&csv), "--seeds", "0,1,2"]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));

    let csv2 = dir.path().join("emb2.csv");
    let embed = wavechar(["embed", "--input", input, "--output", path(&csv2)]);
    assert_eq!(embed.status.code(), Some(0));
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&csv2).unwrap());
    let target = dir.path().join("target.csv");
    let eval = wavechar(["evaluate", "--embeddings", path(&csv2), "--target", path(&target), "--seeds", "0,1,2"]);
    assert_eq!(eval.status.code(), Some(0), "{}", stderr(&eval));
    assert_eq!(stdout(&run), stdout(&eval));
}

#[test]
fn run_needs_labels() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("graphs.json"), r#"{"0": [[0, 1]]}"#).unwrap();
    let out = wavechar(["run", "--input", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("target.csv"), "{}", stderr(&out));
}

#[test]
fn sensitivity_single_point_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_dataset(dir.path(), 30, 12);
    let input = path(dir.path());
    let run = wavechar(["run", "--input", input, "--seeds", "0,1"]);
    let sweep = wavechar(["sensitivity", "--input", input, "--grid", "d=25", "--seeds", "0,1"]);
    assert_eq!(sweep.status.code(), Some(0), "{}", stderr(&sweep));
    let text = stdout(&sweep);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,value,mean_auc,stderr"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[0], "d");
    let mean: f64 = fields[2].parse().unwrap();
    let summary = stdout(&run);
    let run_mean: f64 = summary.split_whitespace().next().unwrap().parse().unwrap();
    assert!((mean - run_mean).abs() < 5e-4, "{mean} vs {summary}");
}

#[test]
fn sensitivity_grid_rows_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_dataset(dir.path(), 20, 13);
    let input = path(dir.path());
    let out_csv = dir.path().join("sweep.csv");
    let out = wavechar([
        "sensitivity", "--input", input, "--grid", "tau=0.1,1", "--grid", "kmax=2", "--seeds", "0", "--output",
        path(&out_csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert_eq!(text.lines().count(), 4, "{text}");

    for bad in ["tau", "alpha=1", "d=1.5", "tau=-1", "kmax="] {
        let out = wavechar(["sensitivity", "--input", input, "--grid", bad]);
        assert_eq!(out.status.code(), Some(1), "{bad}: {}", stderr(&out));
    }
}
