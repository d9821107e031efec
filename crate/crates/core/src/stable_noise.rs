//! Symmetric alpha-stable laws and finite mixtures of them.
//!
//! Scale convention: a component with parameters `(alpha, gamma, mu)` has
//! characteristic function `exp(i mu t - gamma |t|^alpha)`. In particular
//! `alpha = 2` is a normal law with variance `2 gamma` (not `gamma`), and
//! `alpha = 1` is a Cauchy law with scale `gamma`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::{CompositeRule, Refinement};
use crate::rng::{open_unit, standard_exponential, unit, RngState};

/// Tolerance on the sum of normalized mixture weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// One symmetric alpha-stable law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawComponent")]
pub struct StableComponent {
    alpha: f64,
    gamma: f64,
    mu: f64,
}

#[derive(Deserialize)]
struct RawComponent {
    alpha: f64,
    gamma: f64,
    #[serde(default)]
    mu: f64,
}

impl TryFrom<RawComponent> for StableComponent {
    type Error = Error;

    fn try_from(raw: RawComponent) -> Result<Self> {
        StableComponent::new(raw.alpha, raw.gamma, raw.mu)
    }
}

impl StableComponent {
    pub fn new(alpha: f64, gamma: f64, mu: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::invalid("alpha", "alpha must be in (0,2]"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", "gamma must be positive and finite"));
        }
        if !mu.is_finite() {
            return Err(Error::invalid("mu", "mu must be finite"));
        }
        Ok(Self { alpha, gamma, mu })
    }

    /// Normal law with the given variance (`gamma = variance / 2`).
    pub fn gaussian(variance: f64) -> Result<Self> {
        Self::new(2.0, 0.5 * variance, 0.0)
    }

    pub fn cauchy(scale: f64) -> Result<Self> {
        Self::new(1.0, scale, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn characteristic_fn(&self, t: f64) -> Complex64 {
        let modulus = (-self.gamma * t.abs().powf(self.alpha)).exp();
        Complex64::from_polar(modulus, self.mu * t)
    }

    /// Density at `t`. Closed forms for `alpha` in {1, 2}; otherwise the
    /// tail series where it converges quickly, and Fourier inversion by
    /// quadrature elsewhere.
    pub fn density(&self, t: f64) -> Result<f64> {
        let x = t - self.mu;
        if self.alpha == 2.0 {
            let var = 2.0 * self.gamma;
            return Ok((-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt());
        }
        if self.alpha == 1.0 {
            return Ok(self.gamma / (PI * (x * x + self.gamma * self.gamma)));
        }
        let ax = x.abs();
        if let Some(v) = self.tail_series(ax) {
            return Ok(v);
        }
        self.inversion_density(ax)
    }

    /// `(1/pi) * int_0^inf exp(-gamma u^alpha) cos(u x) du`, truncated where
    /// `gamma u^alpha = 40`, on 64-point panels of unit width (at least four
    /// per oscillation period), doubled until successive values differ by
    /// less than 1e-9.
    fn inversion_density(&self, x: f64) -> Result<f64> {
        let u_max = (40.0 / self.gamma).powf(1.0 / self.alpha);
        let periods = u_max * x / (2.0 * PI);
        let panels = u_max.ceil().max((periods / 4.0).ceil()).clamp(1.0, 65_536.0) as usize;
        let (alpha, gamma) = (self.alpha, self.gamma);
        let refine = Refinement {
            initial_panels: panels,
            per_panel: 64,
            abs_tol: 1e-9,
            rel_tol: 0.0,
            max_doublings: 8,
        };
        let integral = refine.run(|p| {
            CompositeRule::new(0.0, u_max, p, 64)
                .integrate(|u| (-gamma * u.powf(alpha)).exp() * (u * x).cos())
        })?;
        Ok(integral / PI)
    }

    /// Series `(1/pi) sum_k (-1)^(k+1) Gamma(alpha k + 1)/k! sin(k pi alpha/2)
    /// gamma^k x^(-alpha k - 1)`. Accepted only while term magnitudes decrease
    /// monotonically down to round-off.
    fn tail_series(&self, x: f64) -> Option<f64> {
        if x <= 0.0 {
            return None;
        }
        let (alpha, gamma) = (self.alpha, self.gamma);
        let log_x = x.ln();
        let mut sum = 0.0;
        let mut previous_magnitude = f64::INFINITY;
        for k in 1..=80u32 {
            let kf = k as f64;
            let log_mag = ln_gamma(alpha * kf + 1.0) - ln_gamma(kf + 1.0) + kf * gamma.ln()
                - alpha * kf * log_x;
            let magnitude = log_mag.exp();
            if magnitude > previous_magnitude {
                return None;
            }
            previous_magnitude = magnitude;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * magnitude * (kf * PI * alpha / 2.0).sin();
            if k > 1 && magnitude < 1e-16 * sum.abs() {
                return Some(sum / (PI * x));
            }
        }
        None
    }

    /// Half-width `T` around `mu` such that the mass outside `[mu - T, mu + T]`
    /// is below `mass`. Uses the leading tail term `C_alpha gamma T^-alpha`
    /// per side with `C_alpha = Gamma(alpha) sin(pi alpha / 2) / pi`; for
    /// `alpha = 2` a normal quantile bound.
    pub fn tail_radius(&self, mass: f64) -> f64 {
        if self.alpha == 2.0 {
            let sd = (2.0 * self.gamma).sqrt();
            // Mills ratio bound: P(|Z| > z) <= 2 phi(z) / z.
            let mut z: f64 = 1.0;
            while 2.0 * (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * z) > mass {
                z += 0.25;
            }
            return z * sd;
        }
        let c_alpha = gamma(self.alpha) * (PI * self.alpha / 2.0).sin() / PI;
        (2.0 * c_alpha * self.gamma / mass).powf(1.0 / self.alpha)
    }
}

/// Chambers-Mallows-Stuck map from `u` in (-pi/2, pi/2) and `w > 0` to a
/// draw from the component's law.
pub fn cms_transform(c: &StableComponent, u: f64, w: f64) -> f64 {
    if c.alpha == 1.0 {
        return c.mu + c.gamma * u.tan();
    }
    let a = c.alpha;
    let scale = c.gamma.powf(1.0 / a);
    let core = (a * u).sin() / u.cos().powf(1.0 / a);
    let tail = ((1.0 - a) * u).cos() / w;
    c.mu + scale * core * tail.powf((1.0 - a) / a)
}

fn draw_component<R: RngCore + ?Sized>(c: &StableComponent, rng: &mut R) -> f64 {
    let u = PI * (open_unit(rng) - 0.5);
    let w = standard_exponential(rng);
    cms_transform(c, u, w)
}

/// `n` i.i.d. draws from one component, starting at the beginning of `rng`'s stream.
pub fn sample_stable(c: &StableComponent, rng: RngState, n: usize) -> Vec<f64> {
    let mut g = rng.generator();
    sample_stable_with(c, &mut g, n)
}

pub fn sample_stable_with<R: RngCore + ?Sized>(
    c: &StableComponent,
    rng: &mut R,
    n: usize,
) -> Vec<f64> {
    (0..n).map(|_| draw_component(c, rng)).collect()
}

/// Convex combination of symmetric stable laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNoiseModel")]
pub struct NoiseModel {
    components: Vec<StableComponent>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawNoiseModel {
    components: Vec<StableComponent>,
    weights: Option<Vec<f64>>,
}

impl TryFrom<RawNoiseModel> for NoiseModel {
    type Error = Error;

    fn try_from(raw: RawNoiseModel) -> Result<Self> {
        let weights = raw
            .weights
            .unwrap_or_else(|| vec![1.0; raw.components.len()]);
        NoiseModel::new(raw.components, weights)
    }
}

impl NoiseModel {
    /// General mixture; weights are normalized to sum to one.
    pub fn new(components: Vec<StableComponent>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("components", "at least one component is required"));
        }
        if weights.len() != components.len() {
            return Err(Error::invalid(
                "weights",
                format!(
                    "weights has {} entries but there are {} components",
                    weights.len(),
                    components.len()
                ),
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid("weights", "weights must be non-negative and finite"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("weights", "weights must not all be zero"));
        }
        let mut weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        // Put the rounding residue on the largest weight.
        let residue = 1.0 - weights.iter().sum::<f64>();
        if let Some(largest) = weights
            .iter_mut()
            .max_by(|a, b| a.partial_cmp(b).expect("finite weights"))
        {
            *largest += residue;
        }
        Ok(Self {
            components,
            weights,
        })
    }

    /// Regression noise: every component must be centred at zero.
    pub fn centered(components: Vec<StableComponent>, weights: Vec<f64>) -> Result<Self> {
        let m = Self::new(components, weights)?;
        m.check_centered()?;
        Ok(m)
    }

    pub fn single(c: StableComponent) -> Self {
        Self {
            components: vec![c],
            weights: vec![1.0],
        }
    }

    /// `(1 - eps) * N(0, var_inlier) + eps * N(0, var_outlier)`.
    pub fn contaminated_gaussian(eps: f64, var_inlier: f64, var_outlier: f64) -> Result<Self> {
        Self::centered(
            vec![
                StableComponent::gaussian(var_inlier)?,
                StableComponent::gaussian(var_outlier)?,
            ],
            vec![1.0 - eps, eps],
        )
    }

    pub fn check_centered(&self) -> Result<()> {
        if self.components.iter().any(|c| c.mu != 0.0) {
            return Err(Error::invalid("mu", "mu must be 0 for regression noise"));
        }
        Ok(())
    }

    pub fn components(&self) -> &[StableComponent] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &StableComponent)> {
        self.weights.iter().copied().zip(self.components.iter())
    }

    /// Largest [`StableComponent::tail_radius`] over the components.
    pub fn tail_radius(&self, mass: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.mu.abs() + c.tail_radius(mass))
            .fold(0.0, f64::max)
    }
}

/// Per-input noise law. Only the constant selector (a bare [`NoiseModel`]) is
/// provided; heteroscedastic selectors plug in here.
pub trait NoiseSelector {
    fn noise_at(&self, x: &[f64]) -> &NoiseModel;
}

impl NoiseSelector for NoiseModel {
    fn noise_at(&self, _x: &[f64]) -> &NoiseModel {
        self
    }
}

/// `n` draws from the mixture. A one-component mixture consumes the stream
/// exactly like [`sample_stable`].
pub fn sample_mixture(m: &NoiseModel, rng: RngState, n: usize) -> Vec<f64> {
    let mut g = rng.generator();
    (0..n).map(|_| draw_mixture(m, &mut g)).collect()
}

/// One draw: pick a component with probability `lambda_i`, then sample it.
pub fn draw_mixture<R: RngCore + ?Sized>(m: &NoiseModel, rng: &mut R) -> f64 {
    if m.components.len() == 1 {
        return draw_component(&m.components[0], rng);
    }
    let v = unit(rng);
    let mut acc = 0.0;
    let mut chosen = m.weights.iter().rposition(|w| *w > 0.0).expect("a positive weight");
    for (i, w) in m.weights.iter().enumerate() {
        acc += w;
        if v < acc {
            chosen = i;
            break;
        }
    }
    draw_component(&m.components[chosen], rng)
}

pub fn mixture_density(m: &NoiseModel, t: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (w, c) in m.iter() {
        acc += w * c.density(t)?;
    }
    Ok(acc)
}

pub fn characteristic_fn(m: &NoiseModel, t: f64) -> Complex64 {
    m.iter()
        .map(|(w, c)| c.characteristic_fn(t) * w)
        .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}
