//! Command-line front end.
//!
//! Every subcommand writes CSV (to `--out` or stdout). When `--out` is given a
//! manifest `<out>.manifest.json` is written next to it; `verify --out DIR`
//! writes one manifest for the whole directory. Manifests hold no timing
//! data so that reruns are byte-identical; wall time goes to stderr.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, unreadable files),
//! 2 on validation failures (invalid profiles, out-of-range parameters,
//! failed acceptance criteria).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::extremum::{extremal_bound_with, polynomial_for};
use crate::montecarlo::{
    estimate, EntryDist, SimulationConfig, Targets, DEFAULT_NORM_MAXITER, DEFAULT_NORM_TOL, RITZ_PERIOD,
};
use crate::profile::{ExactProfile, Kind, MatrixParams, VarianceProfile};
use crate::rational::{self, decimal_string, exact_string, fmt_f64};
use crate::tails::{bound_for_profile, Flavor, TailConstants};
use crate::verify::{self, Suite, Table};
use crate::wick;
use crate::wishart::{build_table, K_LEMMA_SLACK};

pub const THREADS_ENV: &str = "EXTREMALRMT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "extremal-rmt", version, about = "Extremal moment bounds and checks for Gaussian random matrices")]
struct Cli {
    /// Worker threads (falls back to EXTREMALRMT_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Rect,
    Herm,
    Sym,
}

impl ModelArg {
    fn kind(self) -> Kind {
        match self {
            ModelArg::Rect => Kind::Rectangular,
            ModelArg::Herm => Kind::Hermitian,
            ModelArg::Sym => Kind::RealSymmetric,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FlavorArg {
    Small,
    Large,
    Prop,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistArg {
    Gaussian,
    Rademacher,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Exact,
    Wishart,
    Montecarlo,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print σ², σ̃², σ*² (self-adjoint) or σ₁², σ₂², σ*² (rectangular).
    Params {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a tail bound over a grid of t (or ε for the prop flavor).
    Bound {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum)]
        flavor: FlavorArg,
        /// `start:stop:step`, a comma-separated list, or a single value.
        #[arg(long)]
        t: String,
        /// Exponent constant of the symmetric and rectangular bounds.
        #[arg(long)]
        c_exponent: Option<f64>,
        /// Prefactor constant of the symmetric and rectangular bounds.
        #[arg(long)]
        c_prefactor: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact Wick moments with the extremal bounds for orders 1..=p.
    Moments {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coefficient table (k, l, coefficient) of the extremal polynomial.
    Kappa {
        #[arg(long, value_enum)]
        taxonomy: ModelArg,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact Wishart sequences A_p, A′_p, B_p, D_p.
    Wishart {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        pmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample spectral norms.
    Simulate {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "gaussian")]
        dist: DistArg,
        #[arg(long, default_value_t = DEFAULT_NORM_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_NORM_MAXITER)]
        maxiter: usize,
        /// Also write quantiles and a tail table to `<out stem>.summary.csv`.
        #[arg(long)]
        summary: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        /// Directory for the per-criterion CSVs, summary and manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Usage(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn io_context(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("{}: {e}", path.display()))
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = match resolve_threads(cli.threads) {
        Ok(t) => t,
        Err(f) => return report(f),
    };
    let started = Instant::now();
    let outcome = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure::Usage(format!("--threads: {e}"))),
        },
        None => dispatch(cli.command),
    };
    eprintln!("wall time: {:.3} s", started.elapsed().as_secs_f64());
    match outcome {
        Ok(()) => 0,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> i32 {
    match f {
        Failure::Usage(msg) => {
            eprintln!("usage error: {msg}");
            1
        }
        Failure::Validation(msg) => {
            eprintln!("validation failure: {msg}");
            2
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> CliResult<Option<usize>> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                Failure::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))
            })?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    Ok(n)
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Params { profile, out } => cmd_params(&profile, out.as_deref()),
        Command::Bound { profile, model, flavor, t, c_exponent, c_prefactor, out } => {
            let mut consts = TailConstants::default();
            if let Some(c) = c_exponent {
                consts.exponent = c;
            }
            if let Some(c) = c_prefactor {
                consts.prefactor = c;
            }
            cmd_bound(&profile, model, flavor, &t, consts, out.as_deref())
        }
        Command::Moments { profile, p, out } => cmd_moments(&profile, p, out.as_deref()),
        Command::Kappa { taxonomy, p, out } => cmd_kappa(taxonomy, p, out.as_deref()),
        Command::Wishart { n, m, pmax, out } => cmd_wishart(n, m, pmax, out.as_deref()),
        Command::Simulate { profile, samples, seed, dist, tol, maxiter, summary, out } => {
            cmd_simulate(&profile, samples, seed, dist, tol, maxiter, summary, out.as_deref())
        }
        Command::Verify { suite, seed, out } => cmd_verify(suite, seed, out.as_deref()),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_input(path: &Path) -> CliResult<(String, String)> {
    let text = std::fs::read_to_string(path).map_err(io_context(path))?;
    let digest = sha256_hex(text.as_bytes());
    Ok((text, digest))
}

/// Exact profile from JSON; float entries are converted exactly from their
/// binary values.
fn exact_from_text(text: &str) -> CliResult<ExactProfile> {
    match ExactProfile::from_json_str(text) {
        Ok(p) => Ok(p),
        Err(Error::InvalidProfile(_)) => {
            let f = VarianceProfile::from_json_str(text)?;
            let b = f.b().iter().map(|&x| rational::from_f64(x).expect("validated finite")).collect();
            Ok(ExactProfile::from_b(f.kind(), f.n(), f.m(), b)?)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct OutputEntry {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    subcommand: String,
    version: String,
    config: Value,
    config_hash: String,
    seed: Option<u64>,
    constants: BTreeMap<String, Value>,
    outputs: Vec<OutputEntry>,
}

fn basename(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &str) -> CliResult<OutputEntry> {
    std::fs::write(path, contents).map_err(io_context(path))?;
    Ok(OutputEntry { file: basename(path), sha256: sha256_hex(contents.as_bytes()) })
}

fn write_manifest(
    path: &Path,
    subcommand: &str,
    config: Value,
    seed: Option<u64>,
    constants: BTreeMap<String, Value>,
    outputs: Vec<OutputEntry>,
) -> CliResult<()> {
    let config_hash = sha256_hex(config.to_string().as_bytes());
    let m = Manifest {
        subcommand: subcommand.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config,
        config_hash,
        seed,
        constants,
        outputs,
    };
    let mut text = serde_json::to_string_pretty(&m).map_err(Error::from)?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_context(path))?;
    Ok(())
}

/// Writes the table to `out` with its manifest, or prints it to stdout.
fn emit(
    table: &Table,
    out: Option<&Path>,
    subcommand: &str,
    config: Value,
    seed: Option<u64>,
    constants: BTreeMap<String, Value>,
    extra: Vec<(PathBuf, String)>,
) -> CliResult<()> {
    let csv = table.to_csv()?;
    match out {
        Some(path) => {
            let mut outputs = vec![write_file(path, &csv)?];
            for (p, text) in &extra {
                outputs.push(write_file(p, text)?);
            }
            write_manifest(&manifest_path(path), subcommand, config, seed, constants, outputs)
        }
        None => {
            print!("{csv}");
            for (_, text) in &extra {
                print!("{text}");
            }
            Ok(())
        }
    }
}

fn q_cells(x: &BigRational) -> [String; 2] {
    [decimal_string(x), exact_string(x)]
}

fn cmd_params(path: &Path, out: Option<&Path>) -> CliResult<()> {
    let (text, digest) = read_input(path)?;
    let mut table = Table::new("params.csv", &["parameter", "value", "value_exact"]);
    let (kind, n, m) = match ExactProfile::from_json_str(&text) {
        Ok(p) => {
            let names = param_names(p.kind());
            let vals = param_values(p.params());
            for (name, v) in names.iter().zip(&vals) {
                let [d, e] = q_cells(v);
                table.push(vec![name.to_string(), d, e]);
            }
            (p.kind(), p.n(), p.m())
        }
        Err(Error::InvalidProfile(_)) => {
            let p = VarianceProfile::from_json_str(&text)?;
            let names = param_names(p.kind());
            let vals = param_values(p.params());
            for (name, v) in names.iter().zip(vals) {
                table.push(vec![name.to_string(), fmt_f64(v), String::new()]);
            }
            (p.kind(), p.n(), p.m())
        }
        Err(e) => return Err(e.into()),
    };
    let config = json!({ "profile_sha256": digest, "kind": kind.name(), "n": n, "m": m });
    emit(&table, out, "params", config, None, BTreeMap::new(), Vec::new())
}

fn param_values<T>(p: MatrixParams<T>) -> [T; 3] {
    match p {
        MatrixParams::Rectangular { sigma1_sq, sigma2_sq, sigma_star_sq } => [sigma1_sq, sigma2_sq, sigma_star_sq],
        MatrixParams::SelfAdjoint { sigma_sq, sigma_tilde_sq, sigma_star_sq } => [sigma_sq, sigma_tilde_sq, sigma_star_sq],
    }
}

fn param_names(kind: Kind) -> [&'static str; 3] {
    match kind {
        Kind::Rectangular => ["sigma1_sq", "sigma2_sq", "sigma_star_sq"],
        _ => ["sigma_sq", "sigma_tilde_sq", "sigma_star_sq"],
    }
}

/// Parses `start:stop:step`, `a,b,c` or a single value. Grid points are
/// computed exactly as `start + k step` and rounded once.
fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| Failure::Usage(format!("--t {text:?}: {why}"));
    let num = |s: &str| rational::parse(s).map_err(|_| bad("not a number"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => text.split(',').map(|s| num(s).map(|r| rational::to_f64(&r))).collect(),
        3 => {
            let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if step <= BigRational::from_integer(0.into()) {
                return Err(bad("step must be positive"));
            }
            let mut out = Vec::new();
            let mut k = 0i64;
            loop {
                let v = &start + &step * rational::int(k);
                if v > stop {
                    break;
                }
                out.push(rational::to_f64(&v));
                k += 1;
                if out.len() > 1_000_000 {
                    return Err(bad("more than 10^6 grid points"));
                }
            }
            Ok(out)
        }
        _ => Err(bad("expected start:stop:step, a list, or a value")),
    }
}

fn cmd_bound(
    path: &Path,
    model: ModelArg,
    flavor: FlavorArg,
    t_grid: &str,
    consts: TailConstants,
    out: Option<&Path>,
) -> CliResult<()> {
    let (text, digest) = read_input(path)?;
    let profile = VarianceProfile::from_json_str(&text)?;
    if profile.kind() != model.kind() {
        return Err(Failure::Validation(format!(
            "--model {} does not match the {} profile in {}",
            kind_flag(model.kind()),
            profile.kind().name(),
            path.display()
        )));
    }
    let flavor = match flavor {
        FlavorArg::Small => Flavor::SmallDev,
        FlavorArg::Large => Flavor::LargeDev,
        FlavorArg::Prop => Flavor::PropForm,
    };
    let grid = parse_grid(t_grid)?;
    let mut table = Table::new("bound.csv", &["t", "threshold", "prob", "capped"]);
    let mut skipped = 0;
    for t in grid {
        match bound_for_profile(&profile, flavor, t, &consts) {
            Ok(b) => table.push(vec![fmt_f64(t), fmt_f64(b.threshold), fmt_f64(b.prob), b.capped.to_string()]),
            Err(Error::OutOfWindow { value, lo, hi }) => {
                skipped += 1;
                eprintln!("skipping t = {value}: outside the validity window [{lo}, {hi}]");
            }
            Err(e) => return Err(e.into()),
        }
    }
    if skipped > 0 {
        eprintln!("{skipped} grid point(s) skipped");
    }
    let config = json!({
        "profile_sha256": digest,
        "model": kind_flag(model.kind()),
        "flavor": format!("{flavor:?}"),
        "t": t_grid,
    });
    let constants = BTreeMap::from([
        ("C_exponent".to_string(), json!(consts.exponent)),
        ("C_prefactor".to_string(), json!(consts.prefactor)),
    ]);
    emit(&table, out, "bound", config, None, constants, Vec::new())
}

fn kind_flag(k: Kind) -> &'static str {
    match k {
        Kind::Rectangular => "rect",
        Kind::Hermitian => "herm",
        Kind::RealSymmetric => "sym",
    }
}

fn cmd_moments(path: &Path, pmax: usize, out: Option<&Path>) -> CliResult<()> {
    let (text, digest) = read_input(path)?;
    let profile = exact_from_text(&text)?;
    let mut table = Table::new(
        "moments.csv",
        &[
            "p",
            "moment",
            "moment_exact",
            "bound_at_params",
            "bound_at_params_exact",
            "bound_at_ceilings",
            "bound_at_ceilings_exact",
        ],
    );
    for p in 1..=pmax {
        let moment = wick::moment(&profile, p)?;
        let poly = polynomial_for(profile.kind(), p)?;
        let [m1, m2] = q_cells(&moment);
        let (b, c) = match extremal_bound_with(&profile, &poly) {
            Ok(bound) => (q_cells(&bound.at_params), q_cells(&bound.at_ceilings)),
            // A zero profile has no normalized parameters; its moments vanish.
            Err(Error::DegenerateProfile(_)) => (q_cells(&moment), q_cells(&moment)),
            Err(e) => return Err(e.into()),
        };
        let [b1, b2] = b;
        let [c1, c2] = c;
        table.push(vec![p.to_string(), m1, m2, b1, b2, c1, c2]);
    }
    let config = json!({ "profile_sha256": digest, "p": pmax });
    emit(&table, out, "moments", config, None, BTreeMap::new(), Vec::new())
}

fn cmd_kappa(taxonomy: ModelArg, p: usize, out: Option<&Path>) -> CliResult<()> {
    let poly = polynomial_for(taxonomy.kind(), p)?;
    let mut table = Table::new("kappa.csv", &["k", "l", "coefficient"]);
    for ((k, l), c) in &poly.coeffs {
        table.push(vec![k.to_string(), l.to_string(), c.to_string()]);
    }
    let config = json!({ "taxonomy": kind_flag(taxonomy.kind()), "p": p });
    emit(&table, out, "kappa", config, None, BTreeMap::new(), Vec::new())
}

fn cmd_wishart(n: usize, m: usize, pmax: usize, out: Option<&Path>) -> CliResult<()> {
    let t = build_table(n, m, pmax)?;
    let mut table = Table::new(
        "wishart.csv",
        &["p", "A", "A_exact", "A_prime", "A_prime_exact", "B", "B_exact", "D", "D_exact"],
    );
    for p in 0..=pmax {
        let mut row = vec![p.to_string()];
        for v in [&t.a[p], &t.a_prime[p], &t.b[p], &t.d[p]] {
            row.extend(q_cells(v));
        }
        table.push(row);
    }
    let config = json!({ "n": n, "m": m, "pmax": pmax });
    emit(&table, out, "wishart", config, None, BTreeMap::new(), Vec::new())
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sim".into());
    out.with_file_name(format!("{stem}.summary.csv"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    path: &Path,
    samples: usize,
    seed: u64,
    dist: DistArg,
    tol: f64,
    maxiter: usize,
    summary: bool,
    out: Option<&Path>,
) -> CliResult<()> {
    let (text, digest) = read_input(path)?;
    let profile = VarianceProfile::from_json_str(&text)?;
    let mut cfg = SimulationConfig::new(profile.clone(), samples, seed);
    cfg.entry_dist = match dist {
        DistArg::Gaussian => EntryDist::Gaussian,
        DistArg::Rademacher => EntryDist::Rademacher,
    };
    cfg.norm_tol = tol;
    cfg.norm_maxiter = maxiter;
    let res = estimate(&cfg, &Targets { norms: true, ..Targets::default() })?;

    let mut table = Table::new("sim.csv", &["index", "norm", "iterations"]);
    for (i, (norm, it)) in res.norm_by_index.iter().zip(&res.iterations_by_index).enumerate() {
        table.push(vec![i.to_string(), norm.map(fmt_f64).unwrap_or_default(), it.to_string()]);
    }
    if res.no_convergence > 0 {
        eprintln!("{} sample(s) did not converge and were excluded", res.no_convergence);
    }
    if let Some(mean) = res.mean_norm() {
        eprintln!("mean norm {mean:.6} over {} samples", res.norms.len());
    }

    let mut extra = Vec::new();
    if summary {
        let mut s = Table::new("summary.csv", &["statistic", "level", "value", "half_width", "bound"]);
        s.push(vec!["samples".into(), String::new(), res.samples.to_string(), String::new(), String::new()]);
        s.push(vec!["no_convergence".into(), String::new(), res.no_convergence.to_string(), String::new(), String::new()]);
        s.push(vec![
            "mean_norm".into(),
            String::new(),
            res.mean_norm().map(fmt_f64).unwrap_or_default(),
            String::new(),
            String::new(),
        ]);
        for qv in [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99] {
            s.push(vec![
                "quantile".into(),
                fmt_f64(qv),
                res.quantile(qv).map(fmt_f64).unwrap_or_default(),
                String::new(),
                String::new(),
            ]);
        }
        // Tail table at the small-deviation thresholds t = 0, 0.5, ..., 3.
        for k in 0..=6 {
            let t = 0.5 * k as f64;
            let Ok(b) = bound_for_profile(&profile, Flavor::SmallDev, t, &TailConstants::default()) else {
                continue;
            };
            let tail = res.tail(b.threshold);
            s.push(vec![
                "tail".into(),
                fmt_f64(b.threshold),
                fmt_f64(tail.freq),
                fmt_f64(tail.half_width),
                fmt_f64(b.prob),
            ]);
        }
        let text = s.to_csv()?;
        match out {
            Some(o) => extra.push((summary_path(o), text)),
            None => extra.push((PathBuf::new(), text)),
        }
    }

    let config = json!({
        "profile_sha256": digest,
        "samples": samples,
        "dist": format!("{:?}", cfg.entry_dist),
        "norm_tol": tol,
        "norm_maxiter": maxiter,
        "summary": summary,
    });
    let constants = BTreeMap::from([("ritz_period".to_string(), json!(RITZ_PERIOD))]);
    emit(&table, out, "simulate", config, Some(seed), constants, extra)
}

fn cmd_verify(suite: SuiteArg, seed: u64, out: Option<&Path>) -> CliResult<()> {
    let suite = match suite {
        SuiteArg::Exact => Suite::Exact,
        SuiteArg::Wishart => Suite::Wishart,
        SuiteArg::Montecarlo => Suite::MonteCarlo,
        SuiteArg::All => Suite::All,
    };
    let reports = verify::run_suite(suite, seed)?;
    for r in &reports {
        println!("{}", r.line());
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(io_context(dir))?;
        let mut outputs = Vec::new();
        let mut summary = Table::new("summary.csv", &["criterion", "title", "passed", "detail"]);
        for r in &reports {
            summary.push(vec![r.id.to_string(), r.title.to_string(), r.passed.to_string(), r.detail.clone()]);
            for t in &r.tables {
                outputs.push(write_file(&dir.join(&t.name), &t.to_csv()?)?);
            }
        }
        outputs.push(write_file(&dir.join(&summary.name), &summary.to_csv()?)?);
        let consts = TailConstants::default();
        let constants = BTreeMap::from([
            ("envelope".to_string(), json!(verify::ENVELOPE)),
            ("k_lemma_slack".to_string(), json!(K_LEMMA_SLACK)),
            ("C_exponent".to_string(), json!(consts.exponent)),
            ("C_prefactor".to_string(), json!(consts.prefactor)),
            ("norm_tol".to_string(), json!(DEFAULT_NORM_TOL)),
            ("norm_maxiter".to_string(), json!(DEFAULT_NORM_MAXITER)),
            ("ritz_period".to_string(), json!(RITZ_PERIOD)),
            ("mc_samples".to_string(), json!(verify::MC_SAMPLES)),
            ("mgf_samples".to_string(), json!(verify::MGF_SAMPLES)),
            ("sweep_profiles".to_string(), json!(verify::SWEEP_PROFILES)),
        ]);
        let config = json!({ "suite": suite.name() });
        write_manifest(&dir.join("verify.manifest.json"), "verify", config, Some(seed), constants, outputs)?;
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| format!("C{:02}", r.id)).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("criteria {} failed", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0:0.3:0.1").unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(parse_grid("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_grid("3").unwrap(), vec![3.0]);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run(["extremal-rmt", "frobnicate"]), 1);
        assert_eq!(run(["extremal-rmt", "wishart", "--n", "2"]), 1);
        assert_eq!(run(["extremal-rmt", "kappa", "--taxonomy", "nope", "--p", "2"]), 1);
    }

    #[test]
    fn validation_errors_exit_2() {
        assert_eq!(run(["extremal-rmt", "wishart", "--n", "3", "--m", "2", "--pmax", "2"]), 2);
        assert_eq!(run(["extremal-rmt", "kappa", "--taxonomy", "sym", "--p", "50"]), 2);
    }
}
