//! End-to-end tests of the binary: exit codes, instance round-trips, and
//! CSV reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn gpnp_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gpnp"))
}

fn run(args: &[&str]) -> Output {
    gpnp_bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// The data section of a CSV: everything after the `#` comment block.
fn data_section(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Blanks the machine-dependent wall-time column (index 11).
fn mask_time(data: &str) -> String {
    data.lines()
        .map(|line| {
            let mut cells: Vec<&str> = line.split(',').collect();
            if cells.len() == 14 {
                cells[11] = "-";
            }
            cells.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn solve_easy_instance_succeeds() {
    let out = run(&["solve", "--m", "64", "--n", "256", "--s", "5", "--seed", "7", "--alg", "gpnp"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().find(|l| l.starts_with("gpnp,")).expect("one data row");
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells.len(), 14);
    assert_eq!(cells[12], "true", "expected a successful recovery: {row}");
}

#[test]
fn solve_rejects_zero_sparsity_with_exit_2() {
    let out = run(&["solve", "--m", "4", "--n", "8", "--s", "0", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("s must be ≥ 1"), "{}", stderr(&out));
}

#[test]
fn solve_missing_instance_file_exits_2() {
    let out = run(&["solve", "--instance", "definitely-missing.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_algorithm_is_rejected_listing_valid_names() {
    let out = run(&["solve", "--m", "8", "--n", "16", "--s", "2", "--alg", "omp"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    for name in ["gpnp", "iht", "niht", "htp", "cosamp", "sp"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn gen_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.txt");
    let out = run(&["gen", "--m", "16", "--n", "64", "--s", "3", "--seed", "5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));

    // Byte-identical regeneration.
    let first = std::fs::read(&path).unwrap();
    let path2 = dir.path().join("inst2.txt");
    run(&["gen", "--m", "16", "--n", "64", "--s", "3", "--seed", "5", "--out", path2.to_str().unwrap()]);
    assert_eq!(first, std::fs::read(&path2).unwrap());

    let out = run(&["solve", "--instance", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).lines().any(|l| l.starts_with("gpnp,")));
}

#[test]
fn malformed_instance_names_the_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.txt");
    run(&["gen", "--m", "2", "--n", "3", "--s", "1", "--seed", "1", "--out", path.to_str().unwrap()]);
    // Declare m = 2 but provide 3 matrix rows.
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines.insert(2, lines[1].clone());
    std::fs::write(&path, lines.join("\n")).unwrap();
    let out = run(&["solve", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("observation vector"), "{}", stderr(&out));
}

#[test]
fn qcs_instance_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.txt");
    run(&["gen", "--m", "10", "--n", "12", "--s", "2", "--seed", "3", "--kind", "qcs", "--out", path.to_str().unwrap()]);
    let first = std::fs::read(&path).unwrap();
    let path2 = dir.path().join("q2.txt");
    run(&["gen", "--m", "10", "--n", "12", "--s", "2", "--seed", "3", "--kind", "qcs", "--out", path2.to_str().unwrap()]);
    assert_eq!(first, std::fs::read(&path2).unwrap());
    let out = run(&["solve", "--instance", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn bench_success_rate_csv_is_reproducible_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "bench", "success-rate", "--n", "64", "--m", "16", "--s", "2:4:2",
            "--trials", "3", "--seed", "9", "--algs", "gpnp,sp",
            "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let da = data_section(&a);
    let db = data_section(&b);
    assert_eq!(mask_time(&da), mask_time(&db));
    // 2 s-values x 3 trials x 2 algorithms data rows plus the column header.
    assert_eq!(da.lines().count(), 1 + 12);
}

#[test]
fn bench_rejects_unknown_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "bench", "success-rate", "--n", "64", "--m", "16", "--s", "2",
        "--trials", "1", "--algs", "gpnp,magic",
        "--out", dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("valid names"), "{}", stderr(&out));
}

#[test]
fn bench_qcs_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("qcs.csv");
    let out = run(&[
        "bench", "qcs", "--s", "2", "--trials", "2", "--seed", "4",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let data = data_section(&path);
    assert_eq!(data.lines().count(), 1 + 2);
    assert!(data.lines().skip(1).all(|l| l.starts_with("gpnp,80,120,2,")));
}
