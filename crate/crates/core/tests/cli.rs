use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BESSEL: &str = r#"{"model":"bessel","nu":0.5,"sigma":1}"#;
const OU: &str = r#"{"model":"ornstein_uhlenbeck","theta":1}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timeinv")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn out_path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bessel = write(&dir, "bessel.json", BESSEL);
    let ou = write(&dir, "ou.json", OU);
    assert_eq!(code(&["check", "--model", &bessel, "--check", "homogeneity"]), 0);
    let out = run(&["check", "--model", &ou, "--check", "homogeneity"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    assert_eq!(code(&["check", "--model", &bessel, "--check", "nonsense"]), 2);
    assert_eq!(code(&["check", "--model", "/nonexistent/model.json", "--check", "euler"]), 2);
    assert_eq!(code(&["check", "--model", &bessel, "--check", "h-invariance"]), 2);
}

#[test]
fn density_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "w.json", r#"{"model":"wishart","delta":1,"m":2}"#);
    let good = write(&dir, "w4.json", r#"{"model":"wishart","delta":4,"m":2}"#);
    assert_eq!(code(&["density", "--model", &bad, "--t", "1", "--x", "I2", "--y", "I2"]), 2);
    let out = run(&["density", "--model", &good, "--t", "1", "--x", "I2", "--y", "I2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"command\":\"density\""));
    assert_eq!(code(&["density", "--model", BESSEL, "--t", "1", "--x", "1", "--y", "-1"]), 2);
    assert_eq!(code(&["density", "--model", BESSEL, "--t", "1", "--x", "1"]), 2);
    assert_eq!(code(&["density", "--model", r#"{"model":"bessel","nu":0.5,"zeta":1}"#, "--t", "1", "--x", "1", "--y", "1"]), 2);
}

#[test]
fn unknown_suite_is_usage_error() {
    assert_eq!(code(&["verify", "--suite", "everything"]), 2);
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn check_reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (out_path(&dir, "a.json"), out_path(&dir, "b.json"));
    let model = r#"{"model":"wishart","delta":4,"m":2}"#;
    assert_eq!(code(&["check", "--model", model, "--check", "factorization", "--out", &a]), 0);
    assert_eq!(code(&["check", "--model", model, "--check", "factorization", "--out", &b]), 0);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["check", "model", "grid", "tolerance", "max_rel_err", "pass", "details", "config"] {
        assert!(v.get(key).is_some(), "report lacks {key}");
    }
    assert_eq!(v["config"]["model"]["delta"], 4.0);
}

#[test]
fn custom_grid_and_tolerance() {
    let dir = TempDir::new().unwrap();
    let grid = write(
        &dir,
        "grid.json",
        r#"{"x":"I2","s_values":[0.5],"t_values":[1.5],"a_points":["I2",[[2,0.5],[0.5,1]]],"b_points":["I2"],"lambda_scales":[3]}"#,
    );
    let model = r#"{"model":"wishart","delta":4,"m":2}"#;
    let out = out_path(&dir, "r.json");
    assert_eq!(code(&["check", "--model", model, "--check", "semistable", "--grid", &grid, "--tol", "1e-12", "--out", &out]), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["tolerance"], 1e-12);
    assert_eq!(v["config"]["grid"]["lambda_scales"][0], 3.0);
    assert_eq!(code(&["check", "--model", model, "--check", "semistable", "--grid", &grid, "--tol", "-1"]), 2);
}

fn simulate_with_threads(dir: &Path, threads: &str) -> (String, String) {
    let out = dir.join(format!("paths-{threads}.csv"));
    let run = Command::new(env!("CARGO_BIN_EXE_timeinv"))
        .env("RAYON_NUM_THREADS", threads)
        .args([
            "simulate",
            "--model",
            r#"{"model":"gen_dunkl1d","k":1,"lambda":0.5}"#,
            "--paths",
            "200",
            "--seed",
            "9",
            "--grid",
            "log:0.25:4:5",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(run.status.success());
    let meta = std::fs::read_to_string(format!("{}.meta.json", out.display())).unwrap();
    (std::fs::read_to_string(out).unwrap(), meta)
}

#[test]
fn simulation_is_reproducible_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let (csv1, meta1) = simulate_with_threads(dir.path(), "1");
    let (csv4, meta4) = simulate_with_threads(dir.path(), "4");
    assert_eq!(csv1, csv4);
    assert_eq!(meta1, meta4);
    assert_eq!(csv1.lines().next().unwrap(), "path_id,time,component_0,functional");
    assert_eq!(csv1.lines().count(), 1 + 200 * 5);
    let meta: serde_json::Value = serde_json::from_str(&meta1).unwrap();
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["parameters"]["run"]["paths"], 200);
}

#[test]
fn simulate_rejects_bad_grids() {
    let dir = TempDir::new().unwrap();
    let out = out_path(&dir, "p.csv");
    let base = ["simulate", "--model", BESSEL, "--paths", "10", "--seed", "1", "--out", &out, "--grid"];
    for bad in ["lin:0:1:3", "log:0:1:3", "log:2:1:3"] {
        let mut args = base.to_vec();
        args.push(bad);
        assert_eq!(code(&args), 2, "{bad}");
    }
}

#[test]
fn verify_reports_are_byte_identical_without_timestamps() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (out_path(&dir, "a.json"), out_path(&dir, "b.json"));
    assert_eq!(code(&["verify", "--suite", "analytic", "--no-timestamp", "--out", &a]), 0);
    assert_eq!(code(&["verify", "--suite", "analytic", "--no-timestamp", "--out", &b]), 0);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(!text.contains("timestamp") && !text.contains("seconds"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 9);
}
