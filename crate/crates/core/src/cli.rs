//! Command-line front end: `sample`, `fit`, `verify` and `rates`.
//!
//! Every subcommand reads one JSON spec (`--spec`), writes its outputs into
//! `--out`, and returns a process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | `verify` ran but a sandwich inequality failed; output could not be written |
//! | 2 | input validation |
//! | 3 | numerical failure |
//! | 4 | experiment degradation (more than 5% of fits failed) |

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::experiments::{content_hash, run_manifest, run_rate_study, Estimator, ExperimentSpec};
use crate::hypothesis::FeatureMap;
use crate::loss::Dataset;
use crate::risk_oracle::{excess_risk_direct, verify_sandwich, RiskProblem, SandwichReport};
use crate::rng::RngState;
use crate::solver::SolverConfig;
use crate::stable_noise::{sample_mixture, NoiseModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_DEGRADED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mccr", version, about = "Maximum correntropy criterion regression toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw noise samples from a stable mixture.
    Sample(RunConfig),
    /// Fit an estimator to a CSV dataset.
    Fit(RunConfig),
    /// Check the excess-risk sandwich for one problem.
    Verify(RunConfig),
    /// Run a convergence-rate study.
    Rates(RunConfig),
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// JSON spec file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the spec.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: EXIT_CHECK_FAILED,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DegenerateWeights { .. } | Error::SingularSystem | Error::Quadrature { .. } => EXIT_NUMERICAL,
            _ => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Spec for `sample`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub noise: NoiseModel,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

/// Spec for `fit`. `data` is resolved relative to the spec file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub data: PathBuf,
    pub feature_map: FeatureMap,
    pub estimator: Estimator,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Parse argv and run; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    run(&cli.command)
}

pub fn run(cmd: &Command) -> i32 {
    let cfg = match cmd {
        Command::Sample(c) | Command::Fit(c) | Command::Verify(c) | Command::Rates(c) => c,
    };
    let outcome = with_pool(cfg.jobs, || match cmd {
        Command::Sample(c) => cmd_sample(c),
        Command::Fit(c) => cmd_fit(c),
        Command::Verify(c) => cmd_verify(c),
        Command::Rates(c) => cmd_rates(c),
    });
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn with_pool(jobs: Option<usize>, f: impl FnOnce() -> CmdResult + Send) -> CmdResult {
    match jobs {
        Some(0) => Err(Failure::invalid("jobs must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::invalid(format!("cannot start {n} workers: {e}")))?
            .install(f),
        None => f(),
    }
}

fn read_spec<T: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read spec {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn write_out(dir: &Path, name: &str, contents: &[u8]) -> std::result::Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::io(&path, e))
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable output");
    s.push(b'\n');
    s
}

pub fn cmd_sample(cfg: &RunConfig) -> CmdResult {
    let mut spec: SampleSpec = read_spec(&cfg.spec)?;
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    if spec.n == 0 {
        return Err(Failure::invalid("n must be at least 1"));
    }
    let draws = sample_mixture(&spec.noise, RngState::new(spec.seed, spec.stream), spec.n);
    let mut csv = String::with_capacity(24 * spec.n);
    for v in &draws {
        csv.push_str(&format!("{v:?}\n"));
    }
    write_out(&cfg.out, "samples.csv", csv.as_bytes())?;
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "noise": spec.noise,
        "n": spec.n,
        "seed": spec.seed,
        "stream": spec.stream,
        "samples_sha256": content_hash(csv.as_bytes()),
    });
    write_out(&cfg.out, "manifest.json", &to_json(&manifest))?;
    Ok(EXIT_OK)
}

/// Read a dataset CSV with a header row; the last column is the response.
pub fn read_dataset(path: &Path) -> std::result::Result<Dataset, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::invalid(format!("cannot read data {}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
        let vals = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Failure::invalid(format!("{} row {}: {e}", path.display(), i + 1)))?;
        let Some((y, x)) = vals.split_last() else {
            return Err(Failure::invalid(format!("{} row {}: empty row", path.display(), i + 1)));
        };
        if x.is_empty() {
            return Err(Failure::invalid("data needs at least one input column before y"));
        }
        xs.push(x.to_vec());
        ys.push(*y);
    }
    Ok(Dataset::new(xs, ys)?)
}

#[derive(Debug, Serialize)]
struct FitOutput<'a> {
    version: &'static str,
    estimator: &'a Estimator,
    sigma: Option<f64>,
    sigma_scores: Option<Vec<Option<f64>>>,
    data_sha256: String,
    n: usize,
    report: crate::solver::FitReport,
}

pub fn cmd_fit(cfg: &RunConfig) -> CmdResult {
    let mut spec: FitSpec = read_spec(&cfg.spec)?;
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    let data_path = cfg
        .spec
        .parent()
        .map(|d| d.join(&spec.data))
        .unwrap_or_else(|| spec.data.clone());
    let raw = fs::read(&data_path)
        .map_err(|e| Failure::invalid(format!("cannot read data {}: {e}", data_path.display())))?;
    let data = read_dataset(&data_path)?;
    if data.dim() != spec.feature_map.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.feature_map.dim(),
            got: data.dim(),
        }
        .into());
    }
    let rng = RngState::new(spec.seed, 0);
    let (sigma, sigma_scores, report) = match &spec.estimator {
        Estimator::Mccr { sigma } => {
            let sel = crate::solver::fit_mccr_sigma_grid(&spec.feature_map, &data, sigma, &spec.solver, rng)?;
            let scores = (sigma.len() > 1).then_some(sel.scores);
            (Some(sel.sigma), scores, sel.report)
        }
        Estimator::Ols => (None, None, crate::solver::fit_ols(&spec.feature_map, &data)?),
        Estimator::Huber { delta } => (
            None,
            None,
            crate::solver::fit_huber(&spec.feature_map, &data, *delta, &spec.solver)?,
        ),
    };
    let out = FitOutput {
        version: env!("CARGO_PKG_VERSION"),
        estimator: &spec.estimator,
        sigma,
        sigma_scores,
        data_sha256: content_hash(&raw),
        n: data.len(),
        report,
    };
    write_out(&cfg.out, "fit.json", &to_json(&out))?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    version: &'static str,
    holds: bool,
    excess_risk_direct: f64,
    #[serde(flatten)]
    report: SandwichReport,
}

pub fn cmd_verify(cfg: &RunConfig) -> CmdResult {
    let problem: RiskProblem = read_spec(&cfg.spec)?;
    let report = verify_sandwich(&problem)?;
    let direct = excess_risk_direct(&problem)?;
    let holds = report.holds();
    let out = VerifyOutput {
        version: env!("CARGO_PKG_VERSION"),
        holds,
        excess_risk_direct: direct,
        report,
    };
    write_out(&cfg.out, "sandwich.json", &to_json(&out))?;
    if holds {
        Ok(EXIT_OK)
    } else {
        eprintln!("sandwich inequality violated; see sandwich.json");
        Ok(EXIT_CHECK_FAILED)
    }
}

pub fn cmd_rates(cfg: &RunConfig) -> CmdResult {
    let mut spec: ExperimentSpec = read_spec(&cfg.spec)?;
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    let result = run_rate_study(&spec)?;
    let csv = result.to_csv();
    let hash = content_hash(csv.as_bytes());
    write_out(&cfg.out, "results.csv", csv.as_bytes())?;
    write_out(&cfg.out, "medians.csv", result.medians_csv().as_bytes())?;
    write_out(&cfg.out, "manifest.json", &to_json(&run_manifest(&spec, &result, &hash)))?;
    if result.degraded() {
        for s in result.summaries.iter().filter(|s| s.degraded) {
            eprintln!(
                "{}: {} of {} fits failed ({:.1}%)",
                s.method,
                s.failures,
                spec.sizes.len() * spec.trials,
                100.0 * s.failure_fraction
            );
        }
        return Ok(EXIT_DEGRADED);
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes() {
        assert_eq!(Failure::from(Error::SingularSystem).code, EXIT_NUMERICAL);
        assert_eq!(Failure::from(Error::Underdetermined { n: 1, p: 2 }).code, EXIT_INVALID);
        assert_eq!(Failure::from(Error::invalid("alpha", "alpha must be in (0,2]")).message, "alpha must be in (0,2]");
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from(["mccr", "rates", "--spec", "a.json", "--out", "o", "--seed", "3", "--jobs", "2"]).unwrap();
        match cli.command {
            Command::Rates(c) => {
                assert_eq!(c.seed, Some(3));
                assert_eq!(c.jobs, Some(2));
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["mccr", "fit", "--out", "o"]).is_err());
    }
}
