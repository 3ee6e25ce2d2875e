//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use extremal_rmt::verify::{self, CriterionReport, DEFAULT_SEED};

struct Line {
    id: u32,
    passed: bool,
    text: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed())
}

/// Criteria with a wall-clock budget fail when the budget is exceeded.
fn budget(id: u32) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(60)),
        5 => Some(Duration::from_secs(300)),
        8 => Some(Duration::from_secs(600)),
        _ => None,
    }
}

fn line(r: &CriterionReport, took: Duration) -> Line {
    let over = budget(r.id).is_some_and(|b| took > b);
    let passed = r.passed && !over;
    let verdict = if passed { "PASS" } else { "FAIL" };
    let limit = match budget(r.id) {
        Some(b) => format!(", limit {} s", b.as_secs()),
        None => String::new(),
    };
    Line {
        id: r.id,
        passed,
        text: format!("{verdict} [C{:02}] {}: {} ({:.1} s{limit})", r.id, r.title, r.detail, took.as_secs_f64()),
    }
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

/// Criterion 11: two full `verify` runs with the same seed and different
/// worker counts produce byte-identical manifests and CSVs.
fn reproducibility(seed: u64) -> Line {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for threads in ["1", "2"] {
        let out = dir.path().join(format!("threads{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_extremal-rmt"))
            .env_remove("EXTREMALRMT_THREADS")
            .args(["verify", "--suite", "all", "--seed", &seed.to_string(), "--threads", threads, "--out"])
            .arg(&out)
            .output()
            .expect("binary runs");
        runs.push((o.status.code(), o.stdout, files(&out)));
    }
    let (a, b) = (&runs[0], &runs[1]);
    let same_files = a.2 == b.2;
    let passed = a.0 == b.0 && a.1 == b.1 && same_files && !a.2.is_empty();
    let manifest = a.2.iter().any(|(name, _)| name == "verify.manifest.json");
    let differing: Vec<&str> =
        a.2.iter().zip(&b.2).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    let verdict = if passed && manifest { "PASS" } else { "FAIL" };
    Line {
        id: 11,
        passed: passed && manifest,
        text: format!(
            "{verdict} [C11] reproducibility: {} files compared across --threads 1 and 2, exit codes {:?}/{:?}, differing: {} ({:.1} s)",
            a.2.len(),
            a.0,
            b.0,
            if differing.is_empty() { "none".to_string() } else { differing.join(" ") },
            t0.elapsed().as_secs_f64()
        ),
    }
}

fn main() {
    let seed = DEFAULT_SEED;
    let mut lines = Vec::new();

    for id in [1, 2, 3, 4] {
        let (r, took) = timed(|| verify::run_criterion(id, seed).expect("criterion runs"));
        lines.push(line(&r, took));
        println!("{}", lines.last().unwrap().text);
    }

    let (grid, grid_time) = timed(|| verify::wishart_grid().expect("grid builds"));
    let (r5, t5) = timed(|| verify::wishart_oracle(&grid).expect("oracle runs"));
    lines.push(line(&r5, grid_time + t5));
    println!("{}", lines.last().unwrap().text);
    let (r6, t6) = timed(|| verify::wishart_envelope(&grid));
    lines.push(line(&r6, t6));
    println!("{}", lines.last().unwrap().text);
    let (r7, t7) = timed(|| verify::k_lemmas(&grid));
    lines.push(line(&r7, t7));
    println!("{}", lines.last().unwrap().text);

    for id in [8, 9, 10] {
        let (r, took) = timed(|| verify::run_criterion(id, seed).expect("criterion runs"));
        lines.push(line(&r, took));
        println!("{}", lines.last().unwrap().text);
    }

    lines.push(reproducibility(seed));
    println!("{}", lines.last().unwrap().text);

    let failed: Vec<String> = lines.iter().filter(|l| !l.passed).map(|l| format!("C{:02}", l.id)).collect();
    println!("acceptance: {}/{} criteria passed", lines.len() - failed.len(), lines.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
