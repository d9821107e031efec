//! Population excess risk of the correntropy loss under symmetric stable
//! mixture noise, and the two-sided comparison with the squared L2 distance.
//!
//! For `u(x) = f(x) - f*(x)` the excess risk has two independent forms:
//!
//! * direct: `sigma^2 E_x int [exp(-t^2/sigma^2) - exp(-(t-u)^2/sigma^2)] p(t) dt`
//! * spectral: `sigma^3/sqrt(pi) sum_i lambda_i E_x int exp(-sigma^2 xi^2/4 - gamma_i |xi|^alpha_i) sin^2(xi u / 2) dxi`
//!
//! and it is bracketed as `c ||f - f*||^2 <= excess <= ||f - f*||^2` with
//! `c = 2 sigma^3 / pi^(5/2) sum_i lambda_i int_{|xi| <= pi/(2M)} xi^2 exp(-sigma^2 xi^2/4 - gamma_i |xi|^alpha_i) dxi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{l2_rho_distance, Domain, Hypothesis, L2Method, GRID_NODES_PER_AXIS};
use crate::quadrature::{CompositeRule, GaussLegendre, Refinement};
use crate::rng::RngState;
use crate::stable_noise::NoiseModel;

/// Numerical slack allowed on each side of the sandwich.
pub const SANDWICH_SLACK: f64 = 1e-9;

/// Exponent at which integrand factors are considered negligible (`e^-40`).
const DECAY_EXPONENT: f64 = 40.0;

/// Nodes of the fixed rule used for `constant_c`.
pub const CONSTANT_C_NODES: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRiskProblem")]
pub struct RiskProblem {
    noise: NoiseModel,
    target: Hypothesis,
    candidate: Hypothesis,
    sigma: f64,
    m_bound: f64,
    domain: Domain,
    method: L2Method,
}

#[derive(Deserialize)]
struct RawRiskProblem {
    noise: NoiseModel,
    target: Hypothesis,
    candidate: Hypothesis,
    sigma: f64,
    m_bound: f64,
    domain: Domain,
    #[serde(default = "grid_method")]
    method: L2Method,
}

fn grid_method() -> L2Method {
    L2Method::Grid
}

impl TryFrom<RawRiskProblem> for RiskProblem {
    type Error = Error;

    fn try_from(raw: RawRiskProblem) -> Result<Self> {
        RiskProblem::new(
            raw.noise,
            raw.target,
            raw.candidate,
            raw.sigma,
            raw.m_bound,
            raw.domain,
        )
        .map(|p| p.with_method(raw.method))
    }
}

impl RiskProblem {
    /// Validates the noise (zero locations), dimensions, and that both
    /// functions stay within `m_bound` on the domain's check grid.
    pub fn new(
        noise: NoiseModel,
        target: Hypothesis,
        candidate: Hypothesis,
        sigma: f64,
        m_bound: f64,
        domain: Domain,
    ) -> Result<Self> {
        noise.check_centered()?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", "sigma must be positive and finite"));
        }
        if !(m_bound > 0.0 && m_bound.is_finite()) {
            return Err(Error::invalid("m_bound", "m_bound must be positive and finite"));
        }
        for (name, h) in [("target", &target), ("candidate", &candidate)] {
            if h.dim() != domain.dim() {
                return Err(Error::DimensionMismatch {
                    expected: domain.dim(),
                    got: h.dim(),
                });
            }
            let sup = h.sup_norm(&domain)?;
            if sup > m_bound {
                return Err(Error::invalid(
                    name,
                    format!("{name} reaches |f| = {sup} on the domain, above m_bound = {m_bound}"),
                ));
            }
        }
        Ok(Self {
            noise,
            target,
            candidate,
            sigma,
            m_bound,
            domain,
            method: L2Method::Grid,
        })
    }

    /// Outer integration rule over the input law (grid by default).
    pub fn with_method(mut self, method: L2Method) -> Self {
        self.method = method;
        self
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn target(&self) -> &Hypothesis {
        &self.target
    }

    pub fn candidate(&self) -> &Hypothesis {
        &self.candidate
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Outer points with their probability weights, and `u = f - f*` there.
    fn outer_differences(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let (points, weights) = match self.method {
            L2Method::Grid => self.domain.expectation_rule(GRID_NODES_PER_AXIS)?,
            L2Method::MonteCarlo {
                samples,
                seed,
                stream,
            } => {
                if samples == 0 {
                    return Err(Error::invalid("samples", "monte-carlo needs samples"));
                }
                let mut g = RngState::new(seed, stream).generator();
                let pts: Vec<Vec<f64>> =
                    (0..samples).map(|_| self.domain.sample_with(&mut g)).collect();
                (pts, vec![1.0 / samples as f64; samples])
            }
        };
        let u = points
            .iter()
            .map(|x| Ok(self.candidate.evaluate(x)? - self.target.evaluate(x)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok((u, weights))
    }
}

/// Upper end of the frequency integral: every mixture term of the kernel is
/// below `e^-40` beyond it.
fn frequency_cutoff(noise: &NoiseModel, sigma: f64) -> f64 {
    let gaussian = (4.0 * DECAY_EXPONENT).sqrt() / sigma;
    let stable = noise
        .components()
        .iter()
        .map(|c| (DECAY_EXPONENT / c.gamma()).powf(1.0 / c.alpha()))
        .fold(0.0, f64::max);
    gaussian.min(stable)
}

fn spectral_kernel(noise: &NoiseModel, sigma: f64, xi: f64) -> f64 {
    let g = -0.25 * sigma * sigma * xi * xi;
    noise
        .iter()
        .map(|(w, c)| w * (g - c.gamma() * xi.abs().powf(c.alpha())).exp())
        .sum()
}

/// Excess risk through the Fourier form, on 32 panels of 64 Gauss-Legendre
/// nodes over `[0, cutoff]` (the integrand is even in `xi`), doubled until
/// two estimates agree to 1e-12 relative.
pub fn excess_risk_spectral(p: &RiskProblem) -> Result<f64> {
    let (u, weights) = p.outer_differences()?;
    if u.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let sigma = p.sigma;
    let cutoff = frequency_cutoff(&p.noise, sigma);
    let refine = Refinement {
        initial_panels: 32,
        per_panel: 64,
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        max_doublings: 10,
    };
    let integral = refine.run(|panels| {
        let rule = CompositeRule::new(0.0, cutoff, panels, 64);
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(&xi, &w)| {
                let k = spectral_kernel(&p.noise, sigma, xi);
                let s: f64 = u
                    .iter()
                    .zip(&weights)
                    .map(|(&ux, &wx)| {
                        let sn = (0.5 * xi * ux).sin();
                        wx * sn * sn
                    })
                    .sum();
                w * k * s
            })
            .sum::<f64>()
    })?;
    Ok(sigma.powi(3) / PI.sqrt() * 2.0 * integral)
}

/// `exp(-t^2/s2) - exp(-(t-u)^2/s2)` without cancellation for small `u`.
fn gaussian_difference(t: f64, u: f64, s2: f64) -> f64 {
    let shift = (2.0 * t * u - u * u) / s2;
    if shift.abs() < 1.0 {
        -(-(t * t) / s2).exp() * shift.exp_m1()
    } else {
        (-(t * t) / s2).exp() - (-((t - u) * (t - u)) / s2).exp()
    }
}

/// Excess risk by integrating the loss difference against the noise density:
/// `sigma^2 int p(t) E_x[exp(-t^2/s^2) - exp(-(t - u(x))^2/s^2)] dt` over
/// `[min(0, u) - 8 sigma, max(0, u) + 8 sigma]` (both Gaussians are below
/// `e^-64` outside), on panels of width at most `sigma / 2`, doubled until
/// two estimates agree to 1e-12 of the integral's magnitude.
pub fn excess_risk_direct(p: &RiskProblem) -> Result<f64> {
    let (u, weights) = p.outer_differences()?;
    if u.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let sigma = p.sigma;
    let s2 = sigma * sigma;
    let lo = u.iter().copied().fold(0.0, f64::min) - 8.0 * sigma;
    let hi = u.iter().copied().fold(0.0, f64::max) + 8.0 * sigma;

    let mut failure = None;
    let mut integrand = |t: f64| {
        let density = p
            .noise
            .iter()
            .try_fold(0.0, |acc, (w, c)| c.density(t).map(|d| acc + w * d));
        match density {
            Ok(d) if d > 0.0 => {
                let diff: f64 = u
                    .iter()
                    .zip(&weights)
                    .map(|(&ux, &wx)| wx * gaussian_difference(t, ux, s2))
                    .sum();
                d * diff
            }
            Ok(_) => 0.0,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let panels = ((hi - lo) / (0.5 * sigma)).ceil().max(8.0) as usize;
    let mut magnitude = 0.0;
    let refine = |abs_tol: f64| Refinement {
        initial_panels: panels,
        per_panel: 64,
        abs_tol,
        rel_tol: 1e-12,
        max_doublings: 10,
    };
    // The signed integral can be far smaller than its integrand (the loss
    // difference changes sign), so the tolerance follows the absolute mass.
    let rule = CompositeRule::new(lo, hi, panels, 64);
    for (&t, &w) in rule.points.iter().zip(&rule.weights) {
        magnitude += w * integrand(t).abs();
    }
    let value = refine(1e-13 * magnitude).integrate(lo, hi, &mut integrand);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(s2 * value?)
}

/// Lower-bound constant, integrated with one 2048-point Gauss-Legendre rule
/// on `[0, pi/(2M)]` and doubled by symmetry.
pub fn constant_c(noise: &NoiseModel, sigma: f64, m_bound: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma", "sigma must be positive and finite"));
    }
    if !(m_bound > 0.0 && m_bound.is_finite()) {
        return Err(Error::invalid("m_bound", "m_bound must be positive and finite"));
    }
    let window = PI / (2.0 * m_bound);
    let gl = GaussLegendre::cached(CONSTANT_C_NODES);
    let integral = gl.integrate(0.0, window, |xi| xi * xi * spectral_kernel(noise, sigma, xi));
    Ok(2.0 * sigma.powi(3) / PI.powf(2.5) * 2.0 * integral)
}

/// Integrand of [`constant_c`] before the `2 sigma^3 / pi^(5/2)` prefactor.
pub fn constant_c_integrand(noise: &NoiseModel, sigma: f64, xi: f64) -> f64 {
    xi * xi * spectral_kernel(noise, sigma, xi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub excess_risk: f64,
    pub l2_distance: f64,
    pub constant_c: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `excess / (c * l2)`; at least one when the lower bound holds.
    pub lower_margin: Option<f64>,
    /// `l2 / excess`; at least one when the upper bound holds.
    pub upper_margin: Option<f64>,
    pub slack: f64,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// Check `c ||f - f*||^2 <= excess <= ||f - f*||^2` with slack
/// [`SANDWICH_SLACK`], the excess computed spectrally.
pub fn verify_sandwich(p: &RiskProblem) -> Result<SandwichReport> {
    let excess = excess_risk_spectral(p)?;
    let l2 = l2_rho_distance(&p.candidate, &p.target, &p.domain, p.method)?;
    let c = constant_c(&p.noise, p.sigma, p.m_bound)?;
    let lower = c * l2;
    let ratio = |num: f64, den: f64| if den > 0.0 { Some(num / den) } else { None };
    Ok(SandwichReport {
        excess_risk: excess,
        l2_distance: l2,
        constant_c: c,
        lower_ok: lower <= excess + SANDWICH_SLACK,
        upper_ok: excess <= l2 + SANDWICH_SLACK,
        lower_margin: ratio(excess, lower),
        upper_margin: ratio(l2, excess),
        slack: SANDWICH_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::FeatureMap;
    use crate::loss::LossSpec;
    use crate::quadrature::adaptive_simpson;
    use crate::stable_noise::{draw_mixture, StableComponent};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn gaussian_unit() -> NoiseModel {
        NoiseModel::single(StableComponent::new(2.0, 0.5, 0.0).unwrap())
    }

    fn cauchy_unit() -> NoiseModel {
        NoiseModel::single(StableComponent::cauchy(1.0).unwrap())
    }

    fn affine(b0: f64, b1: f64) -> Hypothesis {
        Hypothesis::new(FeatureMap::affine(1), vec![b0, b1]).unwrap()
    }

    fn problem(noise: NoiseModel, f: Hypothesis, sigma: f64, m: f64) -> RiskProblem {
        RiskProblem::new(noise, affine(0.5, 2.0), f, sigma, m, Domain::unit(1)).unwrap()
    }

    /// Closed form for N(0, v) noise and constant u:
    /// `sigma^3 / sqrt(sigma^2 + 2v) (1 - exp(-u^2 / (sigma^2 + 2v)))`.
    fn gaussian_closed_form(sigma: f64, variance: f64, u: f64) -> f64 {
        let s = sigma * sigma + 2.0 * variance;
        sigma.powi(3) / s.sqrt() * -(-(u * u) / s).exp_m1()
    }

    #[test]
    fn zero_when_candidate_is_target() {
        let p = problem(gaussian_unit(), affine(0.5, 2.0), 1.0, 10.0);
        assert_eq!(excess_risk_spectral(&p).unwrap(), 0.0);
        assert_eq!(excess_risk_direct(&p).unwrap(), 0.0);
        let r = verify_sandwich(&p).unwrap();
        assert!(r.holds());
        assert_eq!(r.lower_margin, None);
    }

    #[test]
    fn gaussian_constant_shift_both_routes() {
        let p = problem(gaussian_unit(), affine(0.8, 2.0), 1.0, 10.0);
        let s = excess_risk_spectral(&p).unwrap();
        let d = excess_risk_direct(&p).unwrap();
        let exact = gaussian_closed_form(1.0, 1.0, 0.3);
        assert_relative_eq!(s, d, max_relative = 1e-8);
        assert_relative_eq!(s, exact, max_relative = 1e-10);
        assert_relative_eq!(d, exact, max_relative = 1e-10);
    }

    #[test]
    fn cauchy_constant_shift_both_routes() {
        let p = problem(cauchy_unit(), affine(1.0, 2.0), 1.0, 10.0);
        let s = excess_risk_spectral(&p).unwrap();
        let d = excess_risk_direct(&p).unwrap();
        assert_relative_eq!(s, d, max_relative = 1e-8);
        // 40-digit quadrature reference
        assert_relative_eq!(s, 0.036349554703670921, max_relative = 1e-10);
    }

    #[test]
    fn quadratic_for_small_differences() {
        let a = excess_risk_spectral(&problem(gaussian_unit(), affine(0.51, 2.0), 1.0, 10.0)).unwrap();
        let b = excess_risk_spectral(&problem(gaussian_unit(), affine(0.52, 2.0), 1.0, 10.0)).unwrap();
        assert!((b / a - 4.0).abs() < 0.04, "ratio {}", b / a);
    }

    #[test]
    fn constant_c_dual_quadrature() {
        let noise = gaussian_unit();
        let c = constant_c(&noise, 1.0, 1.0).unwrap();
        let f = |xi: f64| constant_c_integrand(&noise, 1.0, xi);
        let simpson = 2.0 / PI.powf(2.5) * adaptive_simpson(&f, -PI / 2.0, PI / 2.0, 1e-15, 50);
        assert_relative_eq!(c, simpson, max_relative = 1e-10);
        assert_relative_eq!(c, 0.10988211452765222, max_relative = 1e-12);
    }

    #[test]
    fn constant_c_frozen_values() {
        // 40-digit references for M = 10
        let cases = [
            (0.5, gaussian_unit(), 3.662013916413991e-5),
            (1.0, cauchy_unit(), 2.617439830943561e-4),
            (2.0, gaussian_unit(), 2.311478635547020e-3),
        ];
        for (sigma, noise, expected) in cases {
            assert_relative_eq!(constant_c(&noise, sigma, 10.0).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn constant_c_shrinks_with_m_and_is_smooth_in_sigma() {
        let noise = cauchy_unit();
        for sigma in [0.5, 1.0, 2.0] {
            let c1 = constant_c(&noise, sigma, 1.0).unwrap();
            let c2 = constant_c(&noise, sigma, 2.0).unwrap();
            assert!(c1 > 0.0 && c2 > 0.0);
            assert!(c2 <= c1);
        }
        let h = 1e-4;
        let mid = constant_c(&noise, 1.0, 1.0).unwrap();
        let lo = constant_c(&noise, 1.0 - h, 1.0).unwrap();
        let hi = constant_c(&noise, 1.0 + h, 1.0).unwrap();
        assert!((hi - lo).abs() < 1e-2 * mid);
        assert!(((hi + lo) - 2.0 * mid).abs() < 1e-5 * mid);
    }

    #[test]
    fn sandwich_on_random_candidates() {
        let mix = NoiseModel::centered(
            vec![
                StableComponent::new(2.0, 0.5, 0.0).unwrap(),
                StableComponent::cauchy(10.0).unwrap(),
            ],
            vec![0.9, 0.1],
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for noise in [gaussian_unit(), cauchy_unit(), mix] {
            for _ in 0..8 {
                let f = affine(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
                let p = problem(noise.clone(), f, 1.0, 10.0);
                let r = verify_sandwich(&p).unwrap();
                assert!(r.holds(), "{r:?}");
                assert!(r.excess_risk > 0.0);
            }
        }
    }

    #[test]
    fn rejects_invalid_problems() {
        let shifted = NoiseModel::single(StableComponent::new(1.0, 1.0, 0.3).unwrap());
        assert!(RiskProblem::new(shifted, affine(0.0, 0.0), affine(0.0, 0.0), 1.0, 10.0, Domain::unit(1)).is_err());
        let e = RiskProblem::new(gaussian_unit(), affine(0.0, 0.0), affine(0.0, 20.0), 1.0, 10.0, Domain::unit(1))
            .unwrap_err();
        assert!(e.to_string().contains("m_bound"));
        assert!(RiskProblem::new(gaussian_unit(), affine(0.0, 0.0), affine(0.0, 0.0), 0.0, 10.0, Domain::unit(1)).is_err());
    }

    #[test]
    fn problem_json() {
        let text = r#"{
            "noise": {"components": [{"alpha": 1.0, "gamma": 1.0, "mu": 0.0}], "weights": [1.0]},
            "target": {"feature_map": {"kind": "affine", "dim": 1}, "coefficients": [0.5, 2.0]},
            "candidate": {"feature_map": {"kind": "affine", "dim": 1}, "coefficients": [1.0, 2.0]},
            "sigma": 1.0, "m_bound": 10.0,
            "domain": {"lower": [0.0], "upper": [1.0]}
        }"#;
        let p: RiskProblem = serde_json::from_str(text).unwrap();
        assert_eq!(p.sigma(), 1.0);
        let bad = text.replace("\"alpha\": 1.0", "\"alpha\": 2.5");
        assert!(serde_json::from_str::<RiskProblem>(&bad).unwrap_err().to_string().contains("alpha must be in (0,2]"));
    }

    /// Bernstein-type variance bound for the loss-difference class:
    /// `E g^2 <= (8 sigma^2 / c) E g`, both sides by Monte Carlo.
    #[test]
    fn bernstein_condition_by_monte_carlo() {
        let sigma = 1.0;
        let m = 2.0;
        let loss = LossSpec::Correntropy { sigma };
        let target = affine(0.5, 0.5);
        let mut pick = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for noise in [gaussian_unit(), cauchy_unit()] {
            let c = constant_c(&noise, sigma, m).unwrap();
            let bound = 8.0 * sigma * sigma / c;
            for trial in 0..3 {
                let f = affine(pick.random_range(-1.0..1.0), pick.random_range(-1.0..1.0));
                let mut g = RngState::new(77, trial).generator();
                let n = 1_000_000;
                let (mut s1, mut s2) = (0.0, 0.0);
                for _ in 0..n {
                    let x: f64 = crate::rng::unit(&mut g);
                    let y = target.evaluate(&[x]).unwrap() + draw_mixture(&noise, &mut g);
                    let v = loss.loss(y - f.evaluate(&[x]).unwrap())
                        - loss.loss(y - target.evaluate(&[x]).unwrap());
                    s1 += v;
                    s2 += v * v;
                }
                let (eg, eg2) = (s1 / n as f64, s2 / n as f64);
                assert!(eg > 0.0);
                assert!(eg2 <= bound * eg, "E g^2 = {eg2}, E g = {eg}, C = {bound}");
            }
        }
    }
}
