use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn diamonds(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diamonds"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = diamonds(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("one JSON line")
}

/// Builds the coded (2,3) diamond and its sup-norm tree embedding.
fn setup() -> TempDir {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &["build", "--depth", "2", "--branch", "3", "-o", "g.json"],
    );
    ok(
        d,
        &[
            "embed", "--target", "c0", "--graph", "g.json", "-o", "psi.json",
        ],
    );
    dir
}

#[test]
fn build_counts_vertices() {
    let dir = setup();
    let g = json(&std::fs::read(dir.path().join("g.json")).unwrap());
    assert_eq!(g["vertices"].as_array().unwrap().len(), 23);
    assert_eq!(g["height"], 4);
}

#[test]
fn recursive_and_coded_agree() {
    let dir = TempDir::new().unwrap();
    let out = diamonds(dir.path(), &["verify-iso", "--depth", "3", "--branch", "2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bound_check_sets_exit_status() {
    let dir = setup();
    let d = dir.path();
    let base = [
        "distort",
        "--graph",
        "g.json",
        "--embedding",
        "psi.json",
        "--target",
        "c0",
    ];
    let mut pass = base.to_vec();
    pass.extend(["--bound", "3", "-o", "r.json"]);
    ok(d, &pass);
    let report = json(&std::fs::read(d.join("r.json")).unwrap());
    assert_eq!(report["distortion"], 2.0);

    let mut fail = base.to_vec();
    fail.extend(["--bound", "1", "-o", "r1.json"]);
    let out = diamonds(d, &fail);
    assert_eq!(out.status.code(), Some(2));
    let diag = json(&out.stderr);
    assert_eq!(diag["status"], "check_failed");
    assert_eq!(diag["exit"], 2);
}

#[test]
fn guards_reject_large_inputs() {
    let dir = TempDir::new().unwrap();
    let out = diamonds(dir.path(), &["build", "--depth", "9", "-o", "g.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out.stderr)["exit"], 1);
    assert!(!dir.path().join("g.json").exists());

    let out = diamonds(dir.path(), &["build", "-o", "g.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (setup(), setup());
    for name in ["g.json", "psi.json"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    for dir in [&a, &b] {
        ok(
            dir.path(),
            &[
                "bounds", "--p", "2", "--rho", "laakso", "--kmax", "8", "-o", "c.csv",
            ],
        );
        ok(
            dir.path(),
            &["check-lemma51", "--p", "3", "--samples", "500"],
        );
    }
    assert_eq!(
        std::fs::read(a.path().join("c.csv")).unwrap(),
        std::fs::read(b.path().join("c.csv")).unwrap()
    );
}

#[test]
fn report_tables() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["report", "-o", "empty.md"]);
    assert!(std::fs::read_to_string(d.join("empty.md"))
        .unwrap()
        .contains("No distortion reports"));

    ok(
        d,
        &["build", "--depth", "2", "--branch", "2", "-o", "g.json"],
    );
    ok(
        d,
        &[
            "embed", "--target", "l1", "--graph", "g.json", "-o", "l1.csv",
        ],
    );
    ok(
        d,
        &[
            "distort",
            "--graph",
            "g.json",
            "--embedding",
            "l1.csv",
            "--target",
            "l1",
            "-o",
            "r.json",
        ],
    );
    ok(d, &["bounds", "--p", "2", "--kmax", "4", "-o", "curve.csv"]);
    ok(
        d,
        &[
            "report",
            "r.json",
            "curve.csv",
            "-o",
            "rep.md",
            "--csv",
            "rep.csv",
        ],
    );
    let md = std::fs::read_to_string(d.join("rep.md")).unwrap();
    let row = md
        .lines()
        .find(|l| l.starts_with("| 2 |"))
        .expect("k = 2 row");
    let cells: Vec<&str> = row.split('|').map(str::trim).collect();
    assert_eq!(cells[3], "l1");
    assert_eq!(cells[5], "2");
    assert!(md.contains("floor[curve]"));
    let csv = std::fs::read_to_string(d.join("rep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}
