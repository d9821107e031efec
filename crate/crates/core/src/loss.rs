//! Correntropy-induced loss, its derivative and half-quadratic weight, and
//! the squared / Huber baselines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;

/// Default Huber threshold (in residual-scale units).
pub const DEFAULT_HUBER_DELTA: f64 = 1.345;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    /// `sigma^2 (1 - exp(-t^2 / sigma^2))`.
    Correntropy { sigma: f64 },
    /// `t^2`.
    Squared,
    /// `t^2` for `|t| <= delta`, `2 delta |t| - delta^2` beyond.
    Huber { delta: f64 },
}

impl LossSpec {
    pub fn correntropy(sigma: f64) -> Result<Self> {
        LossSpec::Correntropy { sigma }.validated()
    }

    pub fn huber(delta: f64) -> Result<Self> {
        LossSpec::Huber { delta }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            LossSpec::Correntropy { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::invalid("sigma", "sigma must be positive and finite"))
            }
            LossSpec::Huber { delta } if !(delta > 0.0 && delta.is_finite()) => {
                Err(Error::invalid("delta", "huber delta must be positive and finite"))
            }
            ok => Ok(ok),
        }
    }

    pub fn loss(&self, t: f64) -> f64 {
        match *self {
            LossSpec::Correntropy { sigma } => {
                let s2 = sigma * sigma;
                -s2 * (-(t * t) / s2).exp_m1()
            }
            LossSpec::Squared => t * t,
            LossSpec::Huber { delta } => {
                let a = t.abs();
                if a <= delta {
                    t * t
                } else {
                    2.0 * delta * a - delta * delta
                }
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            LossSpec::Correntropy { sigma } => 2.0 * t * (-(t * t) / (sigma * sigma)).exp(),
            LossSpec::Squared => 2.0 * t,
            LossSpec::Huber { delta } => 2.0 * t.clamp(-delta, delta),
        }
    }

    /// Half-quadratic weight `exp(-t^2 / sigma^2)`; correntropy only.
    pub fn hq_weight(&self, t: f64) -> Result<f64> {
        match *self {
            LossSpec::Correntropy { sigma } => Ok((-(t * t) / (sigma * sigma)).exp()),
            _ => Err(Error::Unsupported(
                "half-quadratic weights are defined for the correntropy loss only".into(),
            )),
        }
    }
}

pub fn loss(spec: &LossSpec, t: f64) -> f64 {
    spec.loss(t)
}

pub fn loss_derivative(spec: &LossSpec, t: f64) -> f64 {
    spec.derivative(t)
}

pub fn hq_weight(spec: &LossSpec, t: f64) -> Result<f64> {
    spec.hq_weight(t)
}

/// Paired inputs and responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if let Some(first) = x.first() {
            let d = first.len();
            if let Some(bad) = x.iter().find(|row| row.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: bad.len(),
                });
            }
        }
        if x.iter().flatten().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("y", "dataset values must be finite"));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Split into the first `k` points and the rest.
    pub fn split_at(&self, k: usize) -> (Dataset, Dataset) {
        let k = k.min(self.len());
        (
            Dataset {
                x: self.x[..k].to_vec(),
                y: self.y[..k].to_vec(),
            },
            Dataset {
                x: self.x[k..].to_vec(),
                y: self.y[k..].to_vec(),
            },
        )
    }

    /// Same inputs, responses shifted by `c`.
    pub fn shifted(&self, c: f64) -> Dataset {
        Dataset {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v + c).collect(),
        }
    }

    pub fn residuals(&self, h: &Hypothesis) -> Result<Vec<f64>> {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(x, y)| Ok(y - h.evaluate(x)?))
            .collect()
    }
}

/// `(1/n) sum loss(y_i - h(x_i))`.
pub fn empirical_risk(spec: &LossSpec, h: &Hypothesis, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let r = data.residuals(h)?;
    Ok(mean_loss(spec, &r))
}

pub(crate) fn mean_loss(spec: &LossSpec, residuals: &[f64]) -> f64 {
    residuals.iter().map(|&t| spec.loss(t)).sum::<f64>() / residuals.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::FeatureMap;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(sigma: f64) -> LossSpec {
        LossSpec::correntropy(sigma).unwrap()
    }

    #[test]
    fn loss_values() {
        assert_eq!(c(3.0).loss(0.0), 0.0);
        // 100 * (1 - e^-0.01), evaluated in 40-digit arithmetic
        assert_relative_eq!(c(10.0).loss(1.0), 0.9950166250831946, epsilon = 1e-15);
        assert_eq!(c(1.0).loss(100.0), 1.0);
    }

    #[test]
    fn derivative_and_weight_values() {
        assert_eq!(c(1.0).derivative(0.0), 0.0);
        assert_relative_eq!(c(1.0).derivative(1.0), 2.0 * (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(c(1.0).derivative(1.0), 0.735758882342885, epsilon = 1e-14);
        assert_eq!(c(1.0).hq_weight(0.0).unwrap(), 1.0);
        assert_relative_eq!(c(1.0).hq_weight(1.0).unwrap(), 0.36787944117144233, epsilon = 1e-15);
        assert_relative_eq!(c(2.0).hq_weight(2.0).unwrap(), 0.36787944117144233, epsilon = 1e-15);
        assert!(LossSpec::Squared.hq_weight(1.0).is_err());
        assert!(LossSpec::huber(1.0).unwrap().hq_weight(1.0).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(LossSpec::correntropy(0.0).is_err());
        assert!(LossSpec::correntropy(f64::INFINITY).is_err());
        assert!(LossSpec::huber(-1.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let sigma: f64 = rng.random_range(0.2..5.0);
            let t: f64 = rng.random_range(-3.0 * sigma..3.0 * sigma);
            let spec = c(sigma);
            let h = 1e-6;
            let fd = (spec.loss(t + h) - spec.loss(t - h)) / (2.0 * h);
            let d = spec.derivative(t);
            assert!(
                (fd - d).abs() <= 1e-6 * d.abs().max(1e-3),
                "sigma {sigma} t {t}: fd {fd} vs {d}"
            );
        }
    }

    #[test]
    fn huber_is_continuous_at_threshold() {
        let h = LossSpec::huber(1.345).unwrap();
        assert_relative_eq!(h.loss(1.345), 1.345 * 1.345, epsilon = 1e-15);
        assert_relative_eq!(h.loss(1.345 + 1e-9), 1.345 * 1.345, epsilon = 1e-8);
        assert_eq!(h.derivative(10.0), 2.0 * 1.345);
    }

    #[test]
    fn empirical_risk_cases() {
        let f = FeatureMap::affine(1);
        let h = Hypothesis::new(f, vec![1.0, 2.0]).unwrap();
        let xs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 0.25]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x[0]).collect();
        let data = Dataset::new(xs, ys).unwrap();
        assert_eq!(empirical_risk(&c(1.0), &h, &data).unwrap(), 0.0);

        let one = Dataset::new(vec![vec![0.0]], vec![4.0]).unwrap();
        assert_eq!(empirical_risk(&c(2.0), &h, &one).unwrap(), c(2.0).loss(3.0));

        let empty = Dataset::new(vec![], vec![]).unwrap();
        assert_eq!(empirical_risk(&c(1.0), &h, &empty), Err(Error::EmptyDataset));
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![vec![0.0]], vec![]).is_err());
        assert!(Dataset::new(vec![vec![0.0], vec![0.0, 1.0]], vec![1.0, 2.0]).is_err());
        assert!(Dataset::new(vec![vec![0.0]], vec![f64::NAN]).is_err());
    }

    #[test]
    fn approaches_squared_loss_for_large_sigma() {
        let spec = c(1e3);
        for i in 0..=100 {
            let t = -5.0 + 0.1 * i as f64;
            assert!((spec.loss(t) - t * t).abs() <= t.powi(4) / 1e6 + 1e-15);
        }
    }

    proptest! {
        #[test]
        fn bounded_by_square_and_sigma(sigma in 0.01f64..100.0, t in -1e3f64..1e3) {
            let l = c(sigma).loss(t);
            prop_assert!(l >= 0.0);
            prop_assert!(l <= (t * t).min(sigma * sigma) * (1.0 + 1e-15));
        }

        #[test]
        fn half_quadratic_majorizes(sigma in 0.05f64..20.0, t in -50.0f64..50.0, t0 in -50.0f64..50.0) {
            let spec = c(sigma);
            let w = spec.hq_weight(t0).unwrap();
            let bound = spec.loss(t0) + w * (t * t - t0 * t0);
            let scale = (sigma * sigma).max(t * t).max(t0 * t0);
            prop_assert!(spec.loss(t) <= bound + 1e-12 * scale);
            let at = spec.loss(t0) + w * (t0 * t0 - t0 * t0);
            prop_assert_eq!(at, spec.loss(t0));
        }

        #[test]
        fn weight_decreases_with_magnitude(sigma in 0.1f64..10.0, a in 0.0f64..5.0, b in 0.0f64..5.0) {
            let spec = c(sigma);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (wl, wh) = (spec.hq_weight(lo).unwrap(), spec.hq_weight(hi).unwrap());
            prop_assert!(wl >= wh);
            prop_assert!(wl <= 1.0 && wh >= 0.0);
        }
    }
}
