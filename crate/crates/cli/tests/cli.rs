use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn syncround(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_syncround"))
        .args(args)
        .env_remove("SYNCROUND_THREADS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn inspect_reports_alpha() {
    let out = syncround(&["inspect", "--game", path(&data("k2_coloring.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((r["instances"][0]["alpha"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(r["instances"][0]["nu"]["exact_weights"], true);

    let out = syncround(&["inspect", "--game", path(&data("diagonal.json"))]);
    assert_eq!(report(&out)["instances"][0]["alpha"].as_f64(), Some(1.0));
}

#[test]
fn malformed_and_missing_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"questions\": [\"u\"]").unwrap();
    assert_eq!(syncround(&["inspect", "--game", path(&bad)]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(syncround(&["inspect", "--game", path(&missing)]).status.code(), Some(2));
    assert_eq!(syncround(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn round_exact_strategy_preserves_value() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("tracial.json");
    let out = syncround(&[
        "round",
        "--game",
        path(&data("k2_coloring.json")),
        "--strategy",
        path(&data("k2_synchronous.json")),
        "--out",
        path(&out_file),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let c = &r["certificates"]["rounding"];
    assert!(c["delta"].as_f64().unwrap() < 1e-10);
    assert!((c["value_in"].as_f64().unwrap() - c["value_out"].as_f64().unwrap()).abs() < 1e-8);
    assert_eq!(r["summary"]["pass"], true);
    let tracial: Value = serde_json::from_str(&std::fs::read_to_string(&out_file).unwrap()).unwrap();
    assert!(tracial.is_object());
}

#[test]
fn round_perturbed_strategy_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("tracial.json");
    let out = syncround(&[
        "round",
        "--game",
        path(&data("k2_coloring.json")),
        "--strategy",
        path(&data("k2_perturbed.json")),
        "--out",
        path(&out_file),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let c = &report(&out)["certificates"]["rounding"];
    assert!(c["delta"].as_f64().unwrap() > 0.0);
    assert!(c["d1_total"].as_f64().unwrap() <= c["bound_total"].as_f64().unwrap());
    assert!(out_file.exists());
}

#[test]
fn round_without_diagonal_mass_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = syncround(&[
        "round",
        "--game",
        path(&data("no_diagonal.json")),
        "--strategy",
        path(&data("k2_synchronous.json")),
        "--out",
        path(&dir.path().join("t.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}

#[test]
fn strategy_for_wrong_game_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = syncround(&[
        "round",
        "--game",
        path(&data("triangle_coloring.json")),
        "--strategy",
        path(&data("k2_synchronous.json")),
        "--out",
        path(&dir.path().join("t.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_suite_passes() {
    for suite in ["connes", "measure", "commutator", "duality", "rounding"] {
        let out = syncround(&["verify", "--suite", suite, "--n", "12", "--dims", "5", "--seed", "3"]);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stderr));
        let r = report(&out);
        assert_eq!(r["summary"]["checked"], 12);
        assert_eq!(r["instances"].as_array().unwrap().len(), 12);
    }
}

#[test]
fn verify_rejects_bad_arguments() {
    assert_eq!(syncround(&["verify", "--suite", "connes", "--n", "0", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(syncround(&["verify", "--suite", "nope", "--n", "3", "--seed", "1"]).status.code(), Some(2));
    let dims = syncround(&["verify", "--suite", "connes", "--n", "3", "--dims", "0", "--seed", "1"]);
    assert_eq!(dims.status.code(), Some(2));
}

#[test]
fn verify_is_deterministic_across_thread_counts() {
    let args = ["verify", "--suite", "connes", "--n", "20", "--seed", "11"];
    let strip = |out: Output| {
        let mut v = report(&out);
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    let one = Command::new(env!("CARGO_BIN_EXE_syncround"))
        .args(args)
        .env("SYNCROUND_THREADS", "1")
        .output()
        .unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_syncround"))
        .args(args)
        .env("SYNCROUND_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(strip(one), strip(four));
    assert_eq!(strip(syncround(&args)), strip(syncround(&args)));
}

#[test]
fn invalid_thread_count_exits_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_syncround"))
        .args(["verify", "--suite", "connes", "--n", "2", "--seed", "1"])
        .env("SYNCROUND_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_writes_a_loadable_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("s.json");
    let out = syncround(&[
        "optimize",
        "--game",
        path(&data("diagonal.json")),
        "--dims",
        "2",
        "--iters",
        "5",
        "--seed",
        "1",
        "--out",
        path(&out_file),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((r["instances"][0]["final_value"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let tracial = dir.path().join("t.json");
    let again = syncround(&[
        "round",
        "--game",
        path(&data("diagonal.json")),
        "--strategy",
        path(&out_file),
        "--out",
        path(&tracial),
    ]);
    assert_eq!(again.status.code(), Some(0), "{}", String::from_utf8_lossy(&again.stderr));
}

#[test]
fn optimize_with_zero_iterations_still_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("s.json");
    let out = syncround(&[
        "optimize",
        "--game",
        path(&data("k2_coloring.json")),
        "--dims",
        "3",
        "--iters",
        "0",
        "--seed",
        "2",
        "--out",
        path(&out_file),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["instances"][0]["values"].as_array().unwrap().len(), 1);
    assert!(out_file.exists());
}

#[test]
fn optimize_finds_a_coloring_of_one_edge() {
    let dir = tempfile::tempdir().unwrap();
    let out = syncround(&[
        "optimize",
        "--game",
        path(&data("k2_coloring.json")),
        "--dims",
        "3",
        "--iters",
        "30",
        "--seed",
        "4",
        "--out",
        path(&dir.path().join("s.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["instances"][0]["final_value"].as_f64().unwrap() >= 0.99);
}
