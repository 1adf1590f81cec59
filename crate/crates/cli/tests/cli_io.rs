//! End-to-end checks of the compiled binary: exit codes, report files, and
//! stream formats.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thetalab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("thetalab_test_{}_{name}", std::process::id()));
    p
}

#[test]
fn count_product_writes_report_and_exits_zero() {
    let json_path = tmp_path("report.json");
    let out = run(&[
        "count",
        "--product",
        "i,2i",
        "--translate",
        "zero",
        "--json-out",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&json_path).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["n_on"], 7);
    assert_eq!(report["n_uncertain"], 0);
    assert_eq!(report["bound_thm1"], 12);
    assert_eq!(report["sound"], true);
    assert_eq!(report["family"], "product");
    std::fs::remove_file(&json_path).ok();
}

#[test]
fn count_random_seed7_gives_six() {
    let out = run(&["count", "--random", "--g", "2", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("n_on=6"), "stdout: {stdout}");
}

#[test]
fn uncertain_band_yields_conditional_exit() {
    // thresholds rigged so the odd points land in the Uncertain band
    let out = run(&[
        "count",
        "--product",
        "i,2i",
        "--theta-on",
        "1e-16",
        "--theta-off",
        "1e-1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("n_uncertain=6"), "stdout: {stdout}");
}

#[test]
fn malformed_tau_file_exits_64() {
    let path = tmp_path("bad_tau.json");
    std::fs::write(&path, r#"{"g":1,"re":[[0.0]],"im":[[-1.0]]}"#).unwrap();
    let out = run(&["count", "--tau-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("positive definite"), "stderr: {stderr}");
    std::fs::remove_file(&path).ok();

    let missing = run(&["count", "--tau-file", "/nonexistent/tau.json"]);
    assert_eq!(missing.status.code(), Some(64));
}

#[test]
fn unknown_flag_exits_64() {
    let out = run(&["count", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn bad_translate_exits_64() {
    let out = run(&["count", "--product", "i,2i", "--translate", "torsion:99"]);
    assert_eq!(out.status.code(), Some(64));

    let wrong_len = run(&["count", "--product", "i,2i", "--translate", "vec:0.1i"]);
    assert_eq!(wrong_len.status.code(), Some(64));
}

#[test]
fn explicit_vector_translate_counts_cleanly() {
    // a generic translate passes through no torsion point at all
    let out = run(&[
        "count",
        "--product",
        "i,2i",
        "--translate",
        "vec:0.1+0.2i,0.3i",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("n_on=0"), "stdout: {stdout}");
    assert!(stdout.contains("n_off=16"), "stdout: {stdout}");
}

#[test]
fn tau_file_roundtrip_through_count() {
    // a file family behaves exactly like its generator
    let path = tmp_path("tau_g2.json");
    std::fs::write(
        &path,
        r#"{"g":2,"re":[[0.3,0.1],[0.1,-0.2]],"im":[[1.0,0.2],[0.2,1.5]]}"#,
    )
    .unwrap();
    let out = run(&["count", "--tau-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("n_on=6"), "stdout: {stdout}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn csv_append_writes_header_once() {
    let path = tmp_path("counts.csv");
    std::fs::remove_file(&path).ok();
    for _ in 0..2 {
        let out = run(&[
            "count",
            "--product",
            "i,2i",
            "--csv",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("g,family,seed,translate_kind"));
    assert_eq!(lines[1], lines[2]);
    assert_eq!(lines[1], "2,product,,zero,,7,9,0,12,4,3,true");
    std::fs::remove_file(&path).ok();
}

#[test]
fn explore_file_output_is_reproducible() {
    let p1 = tmp_path("explore1.csv");
    let p2 = tmp_path("explore2.csv");
    let args = [
        "explore",
        "--family",
        "random",
        "--g",
        "2",
        "--samples",
        "10",
        "--seed",
        "5",
        "--translate-mode",
        "through",
    ];
    let out1 = bin()
        .args(args)
        .args(["--out", p1.to_str().unwrap()])
        .output()
        .unwrap();
    let out2 = bin()
        .args(args)
        .args(["--out", p2.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out1.status.code(), Some(0));
    assert_eq!(out2.status.code(), Some(0));
    let a = std::fs::read(&p1).unwrap();
    let b = std::fs::read(&p2).unwrap();
    assert_eq!(a, b, "seeded explore reruns differ");
    assert!(!a.is_empty());
    std::fs::remove_file(&p1).ok();
    std::fs::remove_file(&p2).ok();
}

#[test]
fn verify_subcommand_passes_on_small_configuration() {
    let out = run(&["verify", "--check", "parity", "--g", "2", "--seeds", "3"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS"), "stdout: {stdout}");

    let spanning = run(&[
        "verify", "--check", "spanning", "--g", "2", "--coset", "3", "--seeds", "3",
    ]);
    assert_eq!(spanning.status.code(), Some(0));

    let unknown = run(&["verify", "--check", "bogus"]);
    assert_eq!(unknown.status.code(), Some(64));
}
