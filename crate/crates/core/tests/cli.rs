use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_extremal-rmt"));
    c.env_remove("EXTREMALRMT_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_band(dir: &Path, n: usize, k: usize) -> String {
    let b: Vec<String> =
        (0..n * n).map(|x| if (x / n).abs_diff(x % n) <= k { "1".into() } else { "0".into() }).collect();
    let path = dir.join("band.json");
    std::fs::write(&path, format!(r#"{{"kind": "rectangular", "n": {n}, "m": {n}, "b": [{}]}}"#, b.join(","))).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn params_of_a_band_profile() {
    let dir = tempfile::tempdir().unwrap();
    let k = 2;
    let profile = write_band(dir.path(), 9, k);
    let o = run(&["params", "--profile", &profile]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains(&format!("sigma1_sq,5.0000000000000000e0,{}/1", 2 * k + 1)), "{text}");
    assert!(text.contains(&format!("sigma2_sq,5.0000000000000000e0,{}/1", 2 * k + 1)));
    assert!(text.contains("sigma_star_sq,1.0000000000000000e0,1/1"));
}

#[test]
fn wishart_table_row() {
    let o = run(&["wishart", "--n", "2", "--m", "2", "--pmax", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().find(|l| l.starts_with("2,")).unwrap().to_string();
    assert!(row.contains(",5/2,"), "{row}");
}

#[test]
fn verify_exact_suite_is_green() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = run(&["verify", "--suite", "exact", "--seed", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("verify.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "verify");
    assert_eq!(manifest["seed"], 5);
    for entry in manifest["outputs"].as_array().unwrap() {
        assert!(out.join(entry["file"].as_str().unwrap()).exists());
    }
}

#[test]
fn outputs_come_with_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let o = run(&["kappa", "--taxonomy", "sym", "--p", "3", "--out", table.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&table).unwrap().starts_with("k,l,coefficient\n"));
    let m = std::fs::read_to_string(dir.path().join("table.csv.manifest.json")).unwrap();
    assert!(m.contains("\"config_hash\""));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["wishart", "--n", "2", "--m", "2", "--pmax", "x"]).status.code(), Some(1));
    assert_eq!(run(&["params", "--profile", "/nonexistent/profile.json"]).status.code(), Some(1));
    assert_eq!(run(&["wishart", "--n", "4", "--m", "2", "--pmax", "2"]).status.code(), Some(2));
    let o = bin().args(["kappa", "--taxonomy", "sym", "--p", "2"]).env("EXTREMALRMT_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bound_skips_points_outside_the_window() {
    let dir = tempfile::tempdir().unwrap();
    let profile = write_band(dir.path(), 6, 1);
    let o = run(&["bound", "--profile", &profile, "--model", "rect", "--flavor", "small", "--t", "0:5:0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = stdout(&o).lines().count() - 1;
    assert!(rows > 0 && rows < 11, "{rows}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside the validity window"));
    let mismatch = run(&["bound", "--profile", &profile, "--model", "sym", "--flavor", "small", "--t", "1"]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let profile = write_band(dir.path(), 20, 3);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("sim{threads}.csv"));
        let o = run(&[
            "simulate", "--profile", &profile, "--samples", "50", "--seed", "9", "--summary", "--threads", threads, "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let summary = dir.path().join(format!("sim{threads}.summary.csv"));
        outputs.push((std::fs::read(&out).unwrap(), std::fs::read(summary).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}
