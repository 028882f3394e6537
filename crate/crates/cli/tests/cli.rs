use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ksrobust"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ksrobust-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_corrupt_and_recover() {
    let dir = scratch("sbm");
    let (g, x, h) = (dir.join("g.txt"), dir.join("x.txt"), dir.join("h.txt"));
    run(&["--seed", "3", "--out", p(&g), "gen", "--n", "300", "--d", "10", "--delta", "2", "--labels-out", p(&x)]);
    let again = run(&["--seed", "3", "gen", "--n", "300", "--d", "10", "--delta", "2"]);
    assert_eq!(std::fs::read(&g).unwrap(), again.stdout);
    let header = std::fs::read_to_string(&g).unwrap();
    assert!(header.starts_with("300 "));

    let rec = dir.join("rec.json");
    run(&[
        "--out", p(&h), "corrupt", "--input", p(&g), "--labels", p(&x), "--adversary", "degree-flood", "--mu", "0.05",
        "--d", "10", "--eps", "0.6", "--record-out", p(&rec),
    ]);
    let record: Value = serde_json::from_str(&std::fs::read_to_string(&rec).unwrap()).unwrap();
    assert_eq!(record["corrupted"].as_array().unwrap().len(), 15);

    let dense = json(&run(&["recover", "--mode", "dense", "--input", p(&g), "--d", "10", "--eps", "0.6", "--labels", p(&x), "--calibration-seeds", "2"]));
    assert_eq!(dense["labels"].as_array().unwrap().len(), 300);
    assert!(dense["overlap_sq_frac"].as_f64().unwrap() >= 0.0);
    assert!(dense["feasible"].is_boolean());

    let sparse = json(&run(&["recover", "--mode", "sparse", "--input", p(&h), "--d", "10", "--eps", "0.6", "--mu", "0.05", "--cdeg", "5"]));
    assert!(sparse["removal_log"]["rounds"].as_u64().unwrap() > 0);
    assert!(sparse["max_degree_after"].as_u64().is_some());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn sdp_and_spectral_report_json() {
    let dir = scratch("sdp");
    let g = dir.join("g.txt");
    run(&["--out", p(&g), "gen", "--n", "120", "--d", "8", "--eps", "0.3"]);
    let sdp = json(&run(&["sdp", "--input", p(&g), "--centered", "--restarts", "2"]));
    assert!(sdp["value"].as_f64().unwrap() > 0.0);
    assert!(sdp["dual_gap"].as_f64().unwrap() < 1e-3 * sdp["value"].as_f64().unwrap());
    let spec = json(&run(&["spectral", "--input", p(&g), "--alpha", "8"]));
    assert!(spec["kept_count"].as_u64().unwrap() <= 120);
    assert!(spec["norm_after"].as_f64().unwrap() > 0.0);

    let m = dir.join("a.bin");
    run(&["--out", p(&m), "gen", "--model", "z2", "--n", "40", "--sigma", "2"]);
    assert_eq!(std::fs::metadata(&m).unwrap().len(), 8 + 8 * 40 * 40);
    let z = json(&run(&["sdp", "--input", p(&m), "--matrix"]));
    assert!(z["value"].as_f64().unwrap() > 0.0);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn z2_and_sweep_are_deterministic() {
    let args = ["--seed", "5", "z2", "--n", "60", "--sigma", "2", "--mu", "0.05", "--adversary", "zero-out", "--trials", "2"];
    let a = run(&args);
    assert_eq!(a.stdout, run(&args).stdout);
    let report = json(&a);
    assert_eq!(report["records"].as_array().unwrap().len(), 2);

    let sweep = run(&[
        "sweep", "--algorithm", "baseline", "--n", "150", "--d", "10", "--trials", "2", "--grid", "mu=0,0.1",
        "--grid", "delta=1,2", "--adversary", "sign-flip",
    ]);
    let csv = String::from_utf8(sweep.stdout).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn bad_input_fails_cleanly() {
    let out = bin().args(["recover", "--input", "/nonexistent/graph.txt", "--d", "5"]).output().unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
    let out = bin().args(["z2", "--n", "50", "--sigma", "2", "--adversary", "nope"]).output().unwrap();
    assert!(!out.status.success());
}
