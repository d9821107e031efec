//! Fitting linear-in-parameters models: correntropy regression by
//! half-quadratic iteratively reweighted least squares, plus the OLS and
//! Huber baselines.
//!
//! Each half-quadratic step minimizes the quadratic majorizer
//! `sum_i w_i r_i^2` with `w_i = exp(-r_i^2 / sigma^2)` frozen at the current
//! residuals, so the correntropy objective never increases along a run. The
//! step is then stretched along its own direction while that keeps lowering
//! the objective.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{FeatureMap, Hypothesis};
use crate::loss::{mean_loss, Dataset, LossSpec, DEFAULT_HUBER_DELTA};
use crate::rng::RngState;

/// Weight below which a point is treated as fully rejected.
pub const MIN_WEIGHT: f64 = 1e-300;

/// Relative stationarity `|Phi^T W r|_inf / |Phi^T W y|_inf` required before
/// a run counts as converged.
pub const STATIONARITY_TARGET: f64 = 1e-8;

/// Restarts whose final objectives differ by less than this are tied.
pub const TIE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Relative change in the objective below which iteration stops.
    pub tolerance: f64,
    pub restarts: usize,
    /// Perturbed starts add `scale * max(|beta_j|, 1) * N(0, 1)` to each OLS coefficient.
    pub perturbation_scale: f64,
    /// Ridge added on singular systems, relative to `trace(G) / p`.
    pub ridge_jitter: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-10,
            restarts: 5,
            perturbation_scale: 0.5,
            ridge_jitter: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", "max_iterations must be positive"));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::invalid("tolerance", "tolerance must be in (0, 1)"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts", "restarts must be positive"));
        }
        if !(self.perturbation_scale > 0.0 && self.perturbation_scale.is_finite()) {
            return Err(Error::invalid("perturbation_scale", "perturbation_scale must be positive"));
        }
        if !(self.ridge_jitter > 0.0 && self.ridge_jitter.is_finite()) {
            return Err(Error::invalid("ridge_jitter", "ridge_jitter must be positive"));
        }
        Ok(())
    }
}

/// Per-restart outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRun {
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    /// The drawn start had every weight underflow, so the run started from
    /// the Huber pilot fit instead.
    #[serde(default)]
    pub pilot_start: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub hypothesis: Hypothesis,
    pub loss: LossSpec,
    /// Empirical risk of `hypothesis` under `loss`.
    pub risk: f64,
    /// Objective values of the winning run, starting at its initial point.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub winning_restart: usize,
    /// Whether a ridge jitter had to be added to any solve.
    pub jitter_used: bool,
    /// Relative stationarity residual at the returned coefficients.
    pub stationarity: f64,
    pub restarts: Vec<RestartRun>,
}

struct Design {
    phi: DMatrix<f64>,
    y: DVector<f64>,
}

impl Design {
    fn new(space: &FeatureMap, data: &Dataset) -> Result<Self> {
        let (n, p) = (data.len(), space.len());
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if data.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: data.dim(),
            });
        }
        if n < p {
            return Err(Error::Underdetermined { n, p });
        }
        let mut phi = DMatrix::zeros(n, p);
        let mut row = vec![0.0; p];
        for (i, x) in data.x().iter().enumerate() {
            space.features_into(x, &mut row)?;
            for (j, v) in row.iter().enumerate() {
                phi[(i, j)] = *v;
            }
        }
        Ok(Self {
            phi,
            y: DVector::from_column_slice(data.y()),
        })
    }

    fn residuals(&self, beta: &DVector<f64>) -> Vec<f64> {
        (&self.y - &self.phi * beta).iter().copied().collect()
    }

    /// Minimize `sum_i w_i (y_i - phi_i beta)^2`. Returns the solution and
    /// whether jitter was needed.
    fn weighted_lstsq(&self, weights: &[f64], ridge: f64) -> Result<(DVector<f64>, bool)> {
        let (n, p) = self.phi.shape();
        let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let mut a = self.phi.clone();
        for i in 0..n {
            for j in 0..p {
                a[(i, j)] *= sw[i];
            }
        }
        let b = DVector::from_iterator(n, self.y.iter().zip(&sw).map(|(y, s)| y * s));

        let qr = a.clone().qr();
        let r = qr.r();
        let diag_max = (0..p).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
        let diag_min = (0..p).map(|k| r[(k, k)].abs()).fold(f64::INFINITY, f64::min);
        if diag_max > 0.0 && diag_min > 1e-12 * diag_max {
            let mut qtb = b.clone();
            qr.q_tr_mul(&mut qtb);
            let top = qtb.rows(0, p).into_owned();
            if let Some(beta) = r.solve_upper_triangular(&top) {
                if beta.iter().all(|v| v.is_finite()) {
                    return Ok((beta, false));
                }
            }
        }

        let mut gram = a.transpose() * &a;
        let trace = gram.trace();
        let lambda = ridge * if trace > 0.0 { trace / p as f64 } else { 1.0 };
        for k in 0..p {
            gram[(k, k)] += lambda;
        }
        let rhs = a.transpose() * b;
        let chol = gram.cholesky().ok_or(Error::SingularSystem)?;
        let beta = chol.solve(&rhs);
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem);
        }
        Ok((beta, true))
    }

    /// `|Phi^T W r|_inf / |Phi^T W y|_inf`.
    fn stationarity(&self, weights: &[f64], residuals: &[f64]) -> f64 {
        let p = self.phi.ncols();
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for j in 0..p {
            let col = self.phi.column(j);
            let mut g = 0.0;
            let mut h = 0.0;
            for i in 0..col.len() {
                g += col[i] * weights[i] * residuals[i];
                h += col[i] * weights[i] * self.y[i];
            }
            num = num.max(g.abs());
            den = den.max(h.abs());
        }
        if den == 0.0 {
            if num == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            num / den
        }
    }
}

fn correntropy_weights(residuals: &[f64], sigma: f64) -> Vec<f64> {
    let s2 = sigma * sigma;
    residuals.iter().map(|r| (-(r * r) / s2).exp()).collect()
}

/// Try `beta + s (mm - beta)` for `s = 2, 4, ..., 64` and keep the best point
/// as long as the objective keeps dropping below the plain MM step. Along
/// slowly converging directions this cuts the iteration count severalfold;
/// the objective is still non-increasing because the MM point is the
/// fallback.
fn extrapolate(
    design: &Design,
    spec: &LossSpec,
    beta: &DVector<f64>,
    mm: DVector<f64>,
) -> (DVector<f64>, Vec<f64>, f64) {
    let residuals = design.residuals(&mm);
    let objective = mean_loss(spec, &residuals);
    let direction = &mm - beta;
    let mut best = (mm, residuals, objective);
    let mut step = 2.0;
    while step <= 64.0 {
        let candidate = beta + &direction * step;
        let r = design.residuals(&candidate);
        let obj = mean_loss(spec, &r);
        if obj.is_nan() || obj >= best.2 {
            break;
        }
        best = (candidate, r, obj);
        step *= 2.0;
    }
    best
}

fn all_weights_vanish(residuals: &[f64], sigma: f64) -> bool {
    let s2 = sigma * sigma;
    residuals.iter().all(|r| (-(r * r) / s2).exp() < MIN_WEIGHT)
}

fn to_hypothesis(space: &FeatureMap, beta: &DVector<f64>) -> Result<Hypothesis> {
    Hypothesis::new(space.clone(), beta.iter().copied().collect())
}

struct RunOutcome {
    beta: DVector<f64>,
    objective: f64,
    trace: Vec<f64>,
    converged: bool,
    jitter: bool,
    stationarity: f64,
}

fn half_quadratic_run(
    design: &Design,
    start: DVector<f64>,
    sigma: f64,
    cfg: &SolverConfig,
) -> Result<RunOutcome> {
    let spec = LossSpec::Correntropy { sigma };
    let mut beta = start;
    let mut residuals = design.residuals(&beta);
    let mut objective = mean_loss(&spec, &residuals);
    let mut trace = vec![objective];
    let mut jitter = false;
    let mut converged = false;
    let mut weights = correntropy_weights(&residuals, sigma);
    let mut stationarity = design.stationarity(&weights, &residuals);

    for _ in 0..cfg.max_iterations {
        if all_weights_vanish(&residuals, sigma) {
            return Err(Error::DegenerateWeights { sigma });
        }
        let (mm, jittered) = design.weighted_lstsq(&weights, cfg.ridge_jitter)?;
        jitter |= jittered;
        let (next, next_residuals, next_objective) = extrapolate(design, &spec, &beta, mm);
        trace.push(next_objective);

        let change = (objective - next_objective).abs() / objective.abs().max(f64::MIN_POSITIVE);
        beta = next;
        residuals = next_residuals;
        objective = next_objective;
        weights = correntropy_weights(&residuals, sigma);
        stationarity = design.stationarity(&weights, &residuals);
        if (change <= cfg.tolerance || objective == 0.0) && stationarity <= STATIONARITY_TARGET {
            converged = true;
            break;
        }
    }
    Ok(RunOutcome {
        beta,
        objective,
        trace,
        converged,
        jitter,
        stationarity,
    })
}

/// Fit the correntropy-loss empirical risk minimizer over `space`.
///
/// Restart 0 starts from the OLS solution; restarts `1..` start from
/// perturbations of it drawn from `rng.derive(restart)`. A start at which
/// every weight underflows is replaced by the Huber fit. The lowest final
/// risk wins; ties go to the lowest restart index.
pub fn fit_mccr(
    space: &FeatureMap,
    data: &Dataset,
    sigma: f64,
    cfg: &SolverConfig,
    rng: RngState,
) -> Result<FitReport> {
    LossSpec::correntropy(sigma)?;
    cfg.validate()?;
    let design = Design::new(space, data)?;
    let (ols, ols_jitter) = design.weighted_lstsq(&vec![1.0; data.len()], cfg.ridge_jitter)?;

    let mut runs = Vec::with_capacity(cfg.restarts);
    let mut best: Option<(usize, RunOutcome)> = None;
    let mut first_error = None;
    let mut pilot: Option<Option<DVector<f64>>> = None;
    for restart in 0..cfg.restarts {
        let start = if restart == 0 {
            ols.clone()
        } else {
            let mut g = rng.derive(restart as u64).generator();
            DVector::from_iterator(
                ols.len(),
                ols.iter().map(|b| {
                    let z: f64 = StandardNormal.sample(&mut g);
                    b + cfg.perturbation_scale * b.abs().max(1.0) * z
                }),
            )
        };
        let flat = all_weights_vanish(&design.residuals(&start), sigma);
        let start = match flat {
            true => pilot
                .get_or_insert_with(|| {
                    fit_huber_default(space, data, cfg)
                        .ok()
                        .map(|r| DVector::from_column_slice(r.hypothesis.coefficients()))
                })
                .clone()
                .unwrap_or(start),
            false => start,
        };
        match half_quadratic_run(&design, start, sigma, cfg) {
            Ok(outcome) => {
                runs.push(RestartRun {
                    objective_trace: outcome.trace.clone(),
                    converged: outcome.converged,
                    pilot_start: flat,
                    error: None,
                });
                let better = match &best {
                    None => true,
                    Some((_, b)) => outcome.objective < b.objective - TIE_TOLERANCE,
                };
                if better {
                    best = Some((restart, outcome));
                }
            }
            Err(e) => {
                runs.push(RestartRun {
                    objective_trace: Vec::new(),
                    converged: false,
                    pilot_start: flat,
                    error: Some(e.to_string()),
                });
                first_error.get_or_insert(e);
            }
        }
    }

    let (winner, outcome) = match best {
        Some(b) => b,
        None => return Err(first_error.expect("at least one restart ran")),
    };
    Ok(FitReport {
        hypothesis: to_hypothesis(space, &outcome.beta)?,
        loss: LossSpec::Correntropy { sigma },
        risk: outcome.objective,
        iterations: outcome.trace.len() - 1,
        objective_trace: outcome.trace,
        converged: outcome.converged,
        winning_restart: winner,
        jitter_used: ols_jitter || outcome.jitter,
        stationarity: outcome.stationarity,
        restarts: runs,
    })
}

/// Closed-form least squares.
pub fn fit_ols(space: &FeatureMap, data: &Dataset) -> Result<FitReport> {
    let cfg = SolverConfig::default();
    let design = Design::new(space, data)?;
    let ones = vec![1.0; data.len()];
    let (beta, jitter) = design.weighted_lstsq(&ones, cfg.ridge_jitter)?;
    let residuals = design.residuals(&beta);
    let risk = mean_loss(&LossSpec::Squared, &residuals);
    Ok(FitReport {
        hypothesis: to_hypothesis(space, &beta)?,
        loss: LossSpec::Squared,
        risk,
        objective_trace: vec![risk],
        iterations: 1,
        converged: true,
        winning_restart: 0,
        jitter_used: jitter,
        stationarity: design.stationarity(&ones, &residuals),
        restarts: vec![RestartRun {
            objective_trace: vec![risk],
            converged: true,
            pilot_start: false,
            error: None,
        }],
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Normalized median absolute deviation.
fn mad_scale(residuals: &[f64]) -> f64 {
    let mut r = residuals.to_vec();
    let m = median(&mut r);
    let mut dev: Vec<f64> = residuals.iter().map(|v| (v - m).abs()).collect();
    1.4826 * median(&mut dev)
}

/// Huber M-estimator by IRLS from the OLS start, with the residual scale
/// re-estimated by MAD at every step. `delta` is in scale units
/// (default [`DEFAULT_HUBER_DELTA`]); the reported loss uses `delta * scale`.
pub fn fit_huber(
    space: &FeatureMap,
    data: &Dataset,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<FitReport> {
    LossSpec::huber(delta)?;
    cfg.validate()?;
    let design = Design::new(space, data)?;
    let ones = vec![1.0; data.len()];
    let (mut beta, mut jitter) = design.weighted_lstsq(&ones, cfg.ridge_jitter)?;
    let mut residuals = design.residuals(&beta);
    let mut threshold = delta * mad_scale(&residuals).max(f64::MIN_POSITIVE);
    let mut trace = vec![mean_loss(&LossSpec::Huber { delta: threshold }, &residuals)];
    let mut converged = false;

    for _ in 0..cfg.max_iterations {
        let weights: Vec<f64> = residuals
            .iter()
            .map(|r| if r.abs() <= threshold { 1.0 } else { threshold / r.abs() })
            .collect();
        let (next, jittered) = design.weighted_lstsq(&weights, cfg.ridge_jitter)?;
        jitter |= jittered;
        let step = (&next - &beta).amax();
        let size = next.amax().max(1.0);
        beta = next;
        residuals = design.residuals(&beta);
        threshold = delta * mad_scale(&residuals).max(f64::MIN_POSITIVE);
        trace.push(mean_loss(&LossSpec::Huber { delta: threshold }, &residuals));
        if step <= cfg.tolerance.sqrt() * 1e-3 * size {
            converged = true;
            break;
        }
    }
    let loss = LossSpec::Huber { delta: threshold };
    let risk = mean_loss(&loss, &residuals);
    let weights: Vec<f64> = residuals
        .iter()
        .map(|r| if r.abs() <= threshold { 1.0 } else { threshold / r.abs() })
        .collect();
    Ok(FitReport {
        hypothesis: to_hypothesis(space, &beta)?,
        loss,
        risk,
        iterations: trace.len() - 1,
        objective_trace: trace.clone(),
        converged,
        winning_restart: 0,
        jitter_used: jitter,
        stationarity: design.stationarity(&weights, &residuals),
        restarts: vec![RestartRun {
            objective_trace: trace,
            converged,
            pilot_start: false,
            error: None,
        }],
    })
}

pub fn fit_huber_default(space: &FeatureMap, data: &Dataset, cfg: &SolverConfig) -> Result<FitReport> {
    fit_huber(space, data, DEFAULT_HUBER_DELTA, cfg)
}

/// Outcome of choosing sigma from a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSelection {
    pub sigma: f64,
    /// Validation median absolute residual for each grid entry (`None` if the fit failed).
    pub scores: Vec<Option<f64>>,
    pub report: FitReport,
}

/// Choose sigma by an 80/20 train/validation split (first 80% of the points
/// train), scoring each grid entry by the validation median absolute
/// residual, then refit on all of `data` with the winner. A one-entry grid
/// skips validation.
pub fn fit_mccr_sigma_grid(
    space: &FeatureMap,
    data: &Dataset,
    sigmas: &[f64],
    cfg: &SolverConfig,
    rng: RngState,
) -> Result<SigmaSelection> {
    if sigmas.is_empty() {
        return Err(Error::invalid("sigma", "sigma grid must not be empty"));
    }
    if sigmas.len() == 1 {
        let report = fit_mccr(space, data, sigmas[0], cfg, rng)?;
        return Ok(SigmaSelection {
            sigma: sigmas[0],
            scores: vec![None],
            report,
        });
    }
    let n_train = (data.len() * 4) / 5;
    let (train, valid) = data.split_at(n_train);
    if valid.is_empty() {
        return Err(Error::invalid("sigma", "too few points for a validation split"));
    }
    let mut scores = Vec::with_capacity(sigmas.len());
    let mut best: Option<(usize, f64)> = None;
    for (k, &sigma) in sigmas.iter().enumerate() {
        let score = fit_mccr(space, &train, sigma, cfg, rng.derive(1000 + k as u64))
            .and_then(|fit| {
                let mut abs: Vec<f64> = valid
                    .residuals(&fit.hypothesis)?
                    .iter()
                    .map(|r| r.abs())
                    .collect();
                Ok(median(&mut abs))
            })
            .ok();
        if let Some(s) = score {
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((k, s));
            }
        }
        scores.push(score);
    }
    let (k, _) = match best {
        Some(b) => b,
        None => {
            // Every candidate failed; surface the error from the full-data fit.
            return fit_mccr(space, data, sigmas[0], cfg, rng).map(|report| SigmaSelection {
                sigma: sigmas[0],
                scores,
                report,
            });
        }
    };
    let report = fit_mccr(space, data, sigmas[k], cfg, rng)?;
    Ok(SigmaSelection {
        sigma: sigmas[k],
        scores,
        report,
    })
}

/// `|Phi^T W (y - Phi beta)|_inf / |Phi^T W y|_inf` with correntropy weights at `h`.
pub fn stationarity_residual(data: &Dataset, sigma: f64, h: &Hypothesis) -> Result<f64> {
    let design = Design::new(h.feature_map(), data)?;
    let beta = DVector::from_column_slice(h.coefficients());
    let r = design.residuals(&beta);
    Ok(design.stationarity(&correntropy_weights(&r, sigma), &r))
}
