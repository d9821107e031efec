//! Synthetic data from `Y = f*(X) + eps` and Monte Carlo convergence-rate
//! studies comparing estimators.
//!
//! Each `(n, trial)` cell owns a seed derived from the base seed, so cells can
//! run on any thread in any order and the assembled results are identical.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hypothesis::{l2_rho_distance, Domain, FeatureMap, Hypothesis, L2Method};
use crate::loss::{Dataset, DEFAULT_HUBER_DELTA};
use crate::rng::{splitmix64, RngState};
use crate::solver::{fit_huber, fit_mccr_sigma_grid, fit_ols, FitReport, SolverConfig};
use crate::stable_noise::{draw_mixture, NoiseModel, NoiseSelector};

/// Share of failed fits above which a method's study is flagged as degraded.
pub const FAILURE_BUDGET: f64 = 0.05;

pub const CSV_HEADER: &str = "method,n,trial,sigma,l2_error,emp_risk,converged,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    /// Correntropy regression; a grid of more than one sigma is resolved by
    /// validation per dataset.
    Mccr { sigma: Vec<f64> },
    Ols,
    Huber {
        #[serde(default = "default_huber_delta")]
        delta: f64,
    },
}

fn default_huber_delta() -> f64 {
    DEFAULT_HUBER_DELTA
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Mccr { .. } => "mccr",
            Estimator::Ols => "ols",
            Estimator::Huber { .. } => "huber",
        }
    }

    fn fit(&self, space: &FeatureMap, data: &Dataset, cfg: &SolverConfig, rng: RngState) -> Result<(Option<f64>, FitReport)> {
        match self {
            Estimator::Mccr { sigma } => {
                let sel = fit_mccr_sigma_grid(space, data, sigma, cfg, rng)?;
                Ok((Some(sel.sigma), sel.report))
            }
            Estimator::Ols => Ok((None, fit_ols(space, data)?)),
            Estimator::Huber { delta } => Ok((None, fit_huber(space, data, *delta, cfg)?)),
        }
    }
}

fn default_sizes() -> Vec<usize> {
    (7..=13).map(|k| 1usize << k).collect()
}

fn default_trials() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub domain: Domain,
    pub target: Hypothesis,
    /// Class the estimators fit over; defaults to the target's feature map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_space: Option<FeatureMap>,
    pub noise: NoiseModel,
    pub estimators: Vec<Estimator>,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "grid")]
    pub error_metric: L2Method,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn grid() -> L2Method {
    L2Method::Grid
}

impl ExperimentSpec {
    /// Spec with default sizes (2^7..2^13), 20 trials, seed 0 and grid error.
    pub fn new(domain: Domain, target: Hypothesis, noise: NoiseModel, estimators: Vec<Estimator>) -> Self {
        Self {
            domain,
            target,
            fit_space: None,
            noise,
            estimators,
            sizes: default_sizes(),
            trials: default_trials(),
            seed: 0,
            error_metric: L2Method::Grid,
            solver: SolverConfig::default(),
        }
    }

    pub fn space(&self) -> &FeatureMap {
        self.fit_space.as_ref().unwrap_or(self.target.feature_map())
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes[0] == 0 {
            return Err(Error::invalid("sizes", "sizes must be non-empty and positive"));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sizes", "sizes must be strictly increasing"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "trials must be at least 1"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("estimators", "at least one estimator is required"));
        }
        for (i, e) in self.estimators.iter().enumerate() {
            if self.estimators[..i].iter().any(|o| o.name() == e.name()) {
                return Err(Error::invalid(
                    "estimators",
                    format!("estimator '{}' listed twice", e.name()),
                ));
            }
            if let Estimator::Mccr { sigma } = e {
                if sigma.is_empty() || sigma.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                    return Err(Error::invalid("sigma", "sigma grid must hold positive values"));
                }
            }
        }
        if self.target.dim() != self.domain.dim() || self.space().dim() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                got: self.target.dim(),
            });
        }
        self.solver.validate()
    }
}

/// Seed of the `(n, trial)` cell.
pub fn cell_seed(base: u64, n: usize, trial: usize) -> u64 {
    let h = splitmix64(base);
    let h = splitmix64(h ^ n as u64);
    splitmix64(h ^ (trial as u64).wrapping_mul(0xD605_0B5B_A3F4_63E1))
}

/// Draw `n` points: `x` uniform on the domain, then `y = f*(x) + eps` with
/// `eps` from the selector's law at `x`.
pub fn generate_with_selector<S: NoiseSelector + ?Sized>(
    domain: &Domain,
    target: &Hypothesis,
    noise: &S,
    n: usize,
    rng: RngState,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("n", "n must be at least 1"));
    }
    let mut g = rng.generator();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = domain.sample_with(&mut g);
        let eps = draw_mixture(noise.noise_at(&x), &mut g);
        ys.push(target.evaluate(&x)? + eps);
        xs.push(x);
    }
    Dataset::new(xs, ys)
}

pub fn generate_dataset(spec: &ExperimentSpec, n: usize, rng: RngState) -> Result<Dataset> {
    generate_with_selector(&spec.domain, &spec.target, &spec.noise, n, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub method: String,
    pub n: usize,
    pub trial: usize,
    pub sigma: Option<f64>,
    pub l2_error: f64,
    pub emp_risk: f64,
    pub converged: bool,
    pub seed: u64,
    pub coefficients: Vec<f64>,
    pub error: Option<String>,
}

impl RateRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeMedian {
    pub n: usize,
    /// Median over successful trials; `None` when every trial failed.
    pub median_l2: Option<f64>,
    pub successes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub medians: Vec<SizeMedian>,
    /// Least-squares slope of log2(median error) against log2(n).
    pub slope: Option<f64>,
    pub slope_std_error: Option<f64>,
    pub failures: usize,
    pub failure_fraction: f64,
    pub degraded: bool,
    /// Whether the median error strictly decreases with n.
    pub monotone: bool,
}

impl MethodSummary {
    pub fn median_at(&self, n: usize) -> Option<f64> {
        self.medians.iter().find(|m| m.n == n).and_then(|m| m.median_l2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudyResult {
    pub records: Vec<RateRecord>,
    pub summaries: Vec<MethodSummary>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

impl RateStudyResult {
    pub fn summary(&self, method: &str) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    /// Ratio of median errors `numerator / denominator` at size `n`.
    pub fn median_ratio(&self, n: usize, numerator: &str, denominator: &str) -> Option<f64> {
        let a = self.summary(numerator)?.median_at(n)?;
        let b = self.summary(denominator)?.median_at(n)?;
        Some(a / b)
    }

    pub fn degraded(&self) -> bool {
        self.summaries.iter().any(|s| s.degraded)
    }

    /// Results table, one line per record, shortest round-trip float format.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let line = [
                r.method.clone(),
                r.n.to_string(),
                r.trial.to_string(),
                r.sigma.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.l2_error),
                fmt_f64(r.emp_risk),
                r.converged.to_string(),
                r.seed.to_string(),
            ]
            .join(",");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Median table: `n` then one column per method.
    pub fn medians_csv(&self) -> String {
        let mut out = String::from("n");
        for s in &self.summaries {
            out.push(',');
            out.push_str(&s.method);
        }
        out.push('\n');
        if let Some(first) = self.summaries.first() {
            for (k, m) in first.medians.iter().enumerate() {
                out.push_str(&m.n.to_string());
                for s in &self.summaries {
                    out.push(',');
                    out.push_str(&s.medians[k].median_l2.map(fmt_f64).unwrap_or_default());
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Hex SHA-256 of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Ordinary least-squares slope and its standard error.
pub fn loglog_slope(points: &[(f64, f64)]) -> (Option<f64>, Option<f64>) {
    let k = points.len();
    if k < 2 {
        return (None, None);
    }
    let kf = k as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return (None, None);
    }
    let slope = sxy / sxx;
    if k < 3 {
        return (Some(slope), None);
    }
    let intercept = my - slope * mx;
    let ssr: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (Some(slope), Some((ssr / (kf - 2.0) / sxx).sqrt()))
}

fn summarize(spec: &ExperimentSpec, records: &[RateRecord]) -> Vec<MethodSummary> {
    spec.estimators
        .iter()
        .map(|e| {
            let name = e.name();
            let mine: Vec<&RateRecord> = records.iter().filter(|r| r.method == name).collect();
            let failures = mine.iter().filter(|r| r.failed()).count();
            let medians: Vec<SizeMedian> = spec
                .sizes
                .iter()
                .map(|&n| {
                    let mut errs: Vec<f64> = mine
                        .iter()
                        .filter(|r| r.n == n && !r.failed())
                        .map(|r| r.l2_error)
                        .collect();
                    let successes = errs.len();
                    SizeMedian {
                        n,
                        median_l2: median(&mut errs),
                        successes,
                    }
                })
                .collect();
            let points: Vec<(f64, f64)> = medians
                .iter()
                .filter_map(|m| {
                    m.median_l2
                        .filter(|v| *v > 0.0)
                        .map(|v| ((m.n as f64).log2(), v.log2()))
                })
                .collect();
            let (slope, slope_std_error) = loglog_slope(&points);
            let values: Vec<f64> = medians.iter().filter_map(|m| m.median_l2).collect();
            let monotone = values.windows(2).all(|w| w[1] < w[0]);
            let failure_fraction = if mine.is_empty() {
                0.0
            } else {
                failures as f64 / mine.len() as f64
            };
            let degraded = failure_fraction > FAILURE_BUDGET;
            if degraded {
                log::warn!(
                    "{name}: {failures} of {} fits failed; they are excluded from the slope",
                    mine.len()
                );
            }
            MethodSummary {
                method: name.to_string(),
                medians,
                slope,
                slope_std_error,
                failures,
                failure_fraction,
                degraded,
                monotone,
            }
        })
        .collect()
}

fn run_cell(spec: &ExperimentSpec, n: usize, trial: usize) -> Vec<RateRecord> {
    let seed = cell_seed(spec.seed, n, trial);
    let data = generate_dataset(spec, n, RngState::new(seed, 0));
    spec.estimators
        .iter()
        .enumerate()
        .map(|(k, est)| {
            let outcome = data.as_ref().map_err(Clone::clone).and_then(|d| {
                let (sigma, report) = est.fit(spec.space(), d, &spec.solver, RngState::new(seed, 1 + k as u64))?;
                let l2 = l2_rho_distance(&report.hypothesis, &spec.target, &spec.domain, spec.error_metric)?;
                Ok((sigma, report, l2))
            });
            match outcome {
                Ok((sigma, report, l2)) => RateRecord {
                    method: est.name().to_string(),
                    n,
                    trial,
                    sigma,
                    l2_error: l2,
                    emp_risk: report.risk,
                    converged: report.converged,
                    seed,
                    coefficients: report.hypothesis.coefficients().to_vec(),
                    error: None,
                },
                Err(e) => RateRecord {
                    method: est.name().to_string(),
                    n,
                    trial,
                    sigma: None,
                    l2_error: f64::NAN,
                    emp_risk: f64::NAN,
                    converged: false,
                    seed,
                    coefficients: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// For every size, trial and estimator: fresh dataset, fit, L2 error against
/// the target; then per-method medians over trials and the log-log slope.
/// Records are ordered by size, trial, then estimator, regardless of how the
/// cells were scheduled.
pub fn run_rate_study(spec: &ExperimentSpec) -> Result<RateStudyResult> {
    spec.validate()?;
    let cells: Vec<(usize, usize)> = spec
        .sizes
        .iter()
        .flat_map(|&n| (0..spec.trials).map(move |t| (n, t)))
        .collect();
    let records: Vec<RateRecord> = cells
        .par_iter()
        .map(|&(n, t)| run_cell(spec, n, t))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let summaries = summarize(spec, &records);
    Ok(RateStudyResult { records, summaries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierRow {
    pub n: usize,
    pub mccr: Option<f64>,
    pub ols: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierStudy {
    /// Weight of the rarer mixture component.
    pub contamination: f64,
    pub rows: Vec<OutlierRow>,
    pub result: RateStudyResult,
}

impl OutlierStudy {
    pub fn ratio_at(&self, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n).and_then(|r| r.ratio)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,mccr,ols,ratio\n");
        for r in &self.rows {
            let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", r.n, cell(r.mccr), cell(r.ols), cell(r.ratio)));
        }
        out
    }
}

/// Rate study under a two-component contamination mixture, tabulating the
/// MCCR/OLS median-error ratio per size.
pub fn run_outlier_study(spec: &ExperimentSpec) -> Result<OutlierStudy> {
    if spec.noise.components().len() != 2 {
        return Err(Error::invalid(
            "noise",
            "outlier study needs a two-component contamination mixture",
        ));
    }
    for needed in ["mccr", "ols"] {
        if !spec.estimators.iter().any(|e| e.name() == needed) {
            return Err(Error::invalid(
                "estimators",
                format!("outlier study needs the '{needed}' estimator"),
            ));
        }
    }
    let contamination = spec.noise.weights().iter().copied().fold(1.0, f64::min);
    let result = run_rate_study(spec)?;
    let rows = spec
        .sizes
        .iter()
        .map(|&n| {
            let mccr = result.summary("mccr").and_then(|s| s.median_at(n));
            let ols = result.summary("ols").and_then(|s| s.median_at(n));
            OutlierRow {
                n,
                mccr,
                ols,
                ratio: result.median_ratio(n, "mccr", "ols"),
            }
        })
        .collect();
    Ok(OutlierStudy {
        contamination,
        rows,
        result,
    })
}

/// Manifest: spec echo, crate version, results hash, per-method slopes.
pub fn run_manifest(spec: &ExperimentSpec, result: &RateStudyResult, csv_hash: &str) -> serde_json::Value {
    let slopes: Vec<serde_json::Value> = result
        .summaries
        .iter()
        .map(|s| {
            serde_json::json!({
                "method": s.method,
                "slope": s.slope,
                "slope_std_error": s.slope_std_error,
                "slope_interval": match (s.slope, s.slope_std_error) {
                    (Some(b), Some(se)) => Some([b - 2.0 * se, b + 2.0 * se]),
                    _ => None,
                },
                "monotone": s.monotone,
                "failures": s.failures,
                "degraded": s.degraded,
                "medians": s.medians,
            })
        })
        .collect();
    serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "spec": spec,
        "results_sha256": csv_hash,
        "record_count": result.records.len(),
        "summary": slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::l2_rho_distance_mc;
    use crate::stable_noise::StableComponent;

    fn affine_target() -> Hypothesis {
        Hypothesis::new(FeatureMap::affine(1), vec![0.5, 2.0]).unwrap()
    }

    fn small_spec(noise: NoiseModel, estimators: Vec<Estimator>) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(Domain::unit(1), affine_target(), noise, estimators);
        spec.sizes = vec![64, 128, 256];
        spec.trials = 4;
        spec.seed = 11;
        spec
    }

    #[test]
    fn near_zero_noise_reproduces_target() {
        let noise = NoiseModel::single(StableComponent::new(2.0, 1e-30, 0.0).unwrap());
        let spec = small_spec(noise, vec![Estimator::Ols]);
        let d = generate_dataset(&spec, 100, RngState::new(1, 0)).unwrap();
        for (x, y) in d.x().iter().zip(d.y()) {
            assert!((y - spec.target.evaluate(x).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn cauchy_residual_median_near_zero() {
        let noise = NoiseModel::single(StableComponent::cauchy(1.0).unwrap());
        let spec = small_spec(noise, vec![Estimator::Ols]);
        let d = generate_dataset(&spec, 100_000, RngState::new(2, 0)).unwrap();
        let mut eps: Vec<f64> = d
            .x()
            .iter()
            .zip(d.y())
            .map(|(x, y)| y - spec.target.evaluate(x).unwrap())
            .collect();
        let m = median(&mut eps).unwrap();
        assert!(m.abs() < 0.02, "median {m}");
        assert!(d.x().iter().all(|x| spec.domain.contains(x)));
    }

    #[test]
    fn datasets_are_reproducible() {
        let noise = NoiseModel::single(StableComponent::cauchy(1.0).unwrap());
        let spec = small_spec(noise, vec![Estimator::Ols]);
        let a = generate_dataset(&spec, 500, RngState::new(9, 4)).unwrap();
        let b = generate_dataset(&spec, 500, RngState::new(9, 4)).unwrap();
        assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
        assert_ne!(a, generate_dataset(&spec, 500, RngState::new(9, 5)).unwrap());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = (7..=13).map(|k| (k as f64, 3.0 - 1.0 * k as f64)).collect();
        let (s, se) = loglog_slope(&pts);
        assert!((s.unwrap() + 1.0).abs() < 1e-12);
        assert!(se.unwrap() < 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), (None, None));
    }

    #[test]
    fn spec_validation() {
        let noise = NoiseModel::single(StableComponent::cauchy(1.0).unwrap());
        let mut spec = small_spec(noise, vec![Estimator::Ols]);
        spec.sizes = vec![128, 64];
        assert!(spec.validate().is_err());
        spec.sizes = vec![64];
        spec.trials = 0;
        assert!(spec.validate().is_err());
        spec.trials = 1;
        spec.estimators = vec![Estimator::Ols, Estimator::Ols];
        assert!(spec.validate().is_err());
        spec.estimators = vec![Estimator::Mccr { sigma: vec![] }];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn study_shape_and_determinism() {
        let noise = NoiseModel::single(StableComponent::new(2.0, 0.5, 0.0).unwrap());
        let spec = small_spec(
            noise,
            vec![
                Estimator::Mccr { sigma: vec![2.0] },
                Estimator::Ols,
                Estimator::Huber { delta: DEFAULT_HUBER_DELTA },
            ],
        );
        let a = run_rate_study(&spec).unwrap();
        assert_eq!(a.records.len(), 3 * 4 * 3);
        assert_eq!(a.summaries.len(), 3);
        let b = run_rate_study(&spec).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let first = a.to_csv();
        assert!(first.starts_with(CSV_HEADER));
        assert_eq!(first.lines().count(), 1 + a.records.len());
        for s in &a.summaries {
            assert_eq!(s.failures, 0);
            assert!(s.slope.unwrap() < 0.0);
        }
    }

    #[test]
    fn grid_and_monte_carlo_errors_agree() {
        let noise = NoiseModel::single(StableComponent::cauchy(1.0).unwrap());
        let spec = small_spec(noise, vec![Estimator::Mccr { sigma: vec![1.0] }, Estimator::Ols]);
        let res = run_rate_study(&spec).unwrap();
        for (i, r) in res.records.iter().take(10).enumerate() {
            let h = Hypothesis::new(spec.space().clone(), r.coefficients.clone()).unwrap();
            let mc = l2_rho_distance_mc(&h, &spec.target, &spec.domain, 100_000, RngState::new(5, i as u64)).unwrap();
            assert!(
                (mc.mean - r.l2_error).abs() <= 3.0 * mc.std_error + 1e-12,
                "grid {} mc {} +- {}",
                r.l2_error,
                mc.mean,
                mc.std_error
            );
        }
    }

    #[test]
    fn outlier_study_requires_two_components() {
        let noise = NoiseModel::single(StableComponent::cauchy(1.0).unwrap());
        let spec = small_spec(noise, vec![Estimator::Mccr { sigma: vec![1.0] }, Estimator::Ols]);
        assert!(run_outlier_study(&spec).is_err());
        let mix = NoiseModel::contaminated_gaussian(0.05, 1.0, 1e4).unwrap();
        let spec = small_spec(mix, vec![Estimator::Mccr { sigma: vec![1.0, 2.0] }, Estimator::Ols]);
        let study = run_outlier_study(&spec).unwrap();
        assert_eq!(study.contamination, 0.05);
        assert_eq!(study.rows.len(), 3);
        assert!(study.ratio_at(256).unwrap() < 1.0);
        assert!(study.to_csv().starts_with("n,mccr,ols,ratio\n"));
    }

    #[test]
    fn manifest_carries_hash_and_slopes() {
        let noise = NoiseModel::single(StableComponent::new(2.0, 0.5, 0.0).unwrap());
        let mut spec = small_spec(noise, vec![Estimator::Ols]);
        spec.trials = 2;
        let res = run_rate_study(&spec).unwrap();
        let hash = content_hash(res.to_csv().as_bytes());
        let m = run_manifest(&spec, &res, &hash);
        assert_eq!(m["results_sha256"], hash.as_str());
        assert_eq!(m["summary"][0]["method"], "ols");
        let echoed: ExperimentSpec = serde_json::from_value(m["spec"].clone()).unwrap();
        assert_eq!(echoed, spec);
    }
}
