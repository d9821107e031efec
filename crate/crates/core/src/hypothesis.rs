//! Linear-in-parameters hypothesis spaces on a box-shaped input domain.

use std::f64::consts::TAU;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::rng::{unit, RngState};

/// Gauss-Legendre nodes per axis for the grid L2 rule.
pub const GRID_NODES_PER_AXIS: usize = 64;

/// Points per axis of the sup-norm check grid in one dimension.
pub const SUP_GRID_POINTS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureKind {
    /// `[1, x_1, ..., x_d]`.
    Affine,
    /// All monomials of total degree at most `degree`, graded order.
    Polynomial { degree: u32 },
    /// `[1, cos 2 pi k x_j, sin 2 pi k x_j]` for `k = 1..=max_frequency`,
    /// per coordinate (additive, no cross terms).
    Trigonometric { max_frequency: u32 },
    /// `[1, exp(-|x - c|^2 / (2 h^2)) for each center c]`.
    GaussianCenters { centers: Vec<Vec<f64>>, bandwidth: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFeatureMap", into = "RawFeatureMap")]
pub struct FeatureMap {
    kind: FeatureKind,
    dim: usize,
    exponents: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct RawFeatureMap {
    #[serde(flatten)]
    kind: FeatureKind,
    #[serde(default = "one")]
    dim: usize,
}

fn one() -> usize {
    1
}

impl TryFrom<RawFeatureMap> for FeatureMap {
    type Error = Error;

    fn try_from(raw: RawFeatureMap) -> Result<Self> {
        FeatureMap::new(raw.kind, raw.dim)
    }
}

impl From<FeatureMap> for RawFeatureMap {
    fn from(f: FeatureMap) -> Self {
        RawFeatureMap {
            kind: f.kind,
            dim: f.dim,
        }
    }
}

impl FeatureMap {
    pub fn new(kind: FeatureKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "input dimension must be at least 1"));
        }
        let mut exponents = Vec::new();
        match &kind {
            FeatureKind::Polynomial { degree } => {
                for total in 0..=*degree {
                    push_compositions(total, dim, &mut Vec::new(), &mut exponents);
                }
            }
            FeatureKind::GaussianCenters { centers, bandwidth } => {
                if !(*bandwidth > 0.0 && bandwidth.is_finite()) {
                    return Err(Error::invalid("bandwidth", "bandwidth must be positive"));
                }
                if centers.is_empty() {
                    return Err(Error::invalid("centers", "at least one center is required"));
                }
                if let Some(c) = centers.iter().find(|c| c.len() != dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: c.len(),
                    });
                }
            }
            FeatureKind::Affine | FeatureKind::Trigonometric { .. } => {}
        }
        Ok(Self {
            kind,
            dim,
            exponents,
        })
    }

    pub fn affine(dim: usize) -> Self {
        Self::new(FeatureKind::Affine, dim).expect("affine map with dim >= 1")
    }

    pub fn polynomial(dim: usize, degree: u32) -> Self {
        Self::new(FeatureKind::Polynomial { degree }, dim).expect("polynomial map with dim >= 1")
    }

    pub fn trigonometric(dim: usize, max_frequency: u32) -> Self {
        Self::new(FeatureKind::Trigonometric { max_frequency }, dim)
            .expect("trigonometric map with dim >= 1")
    }

    pub fn kind(&self) -> &FeatureKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of features `p`.
    pub fn len(&self) -> usize {
        match &self.kind {
            FeatureKind::Affine => self.dim + 1,
            FeatureKind::Polynomial { .. } => self.exponents.len(),
            FeatureKind::Trigonometric { max_frequency } => {
                1 + 2 * self.dim * *max_frequency as usize
            }
            FeatureKind::GaussianCenters { centers, .. } => 1 + centers.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.features_into(x, &mut out)?;
        Ok(out)
    }

    /// Write the feature vector at `x` into `out` (length `p`).
    pub fn features_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        debug_assert_eq!(out.len(), self.len());
        match &self.kind {
            FeatureKind::Affine => {
                out[0] = 1.0;
                out[1..].copy_from_slice(x);
            }
            FeatureKind::Polynomial { .. } => {
                for (slot, exps) in out.iter_mut().zip(&self.exponents) {
                    *slot = x
                        .iter()
                        .zip(exps)
                        .map(|(xi, &e)| xi.powi(e as i32))
                        .product();
                }
            }
            FeatureKind::Trigonometric { max_frequency } => {
                out[0] = 1.0;
                let mut k = 1;
                for xi in x {
                    for f in 1..=*max_frequency {
                        let angle = TAU * f as f64 * xi;
                        out[k] = angle.cos();
                        out[k + 1] = angle.sin();
                        k += 2;
                    }
                }
            }
            FeatureKind::GaussianCenters { centers, bandwidth } => {
                out[0] = 1.0;
                let denom = 2.0 * bandwidth * bandwidth;
                for (slot, c) in out[1..].iter_mut().zip(centers) {
                    let d2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                    *slot = (-d2 / denom).exp();
                }
            }
        }
        Ok(())
    }
}

fn push_compositions(total: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if slots == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        push_compositions(total - first, slots - 1, prefix, out);
        prefix.pop();
    }
}

/// Axis-aligned box with the uniform law as the input distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain")]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawDomain> for Domain {
    type Error = Error;

    fn try_from(raw: RawDomain) -> Result<Self> {
        Domain::new(raw.lower, raw.upper)
    }
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::invalid("lower", "domain needs at least one coordinate"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::invalid(
                    "upper",
                    "domain bounds must be finite with lower < upper",
                ));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[0, 1]^d`.
    pub fn unit(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn sample_with<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| a + (b - a) * unit(rng))
            .collect()
    }

    /// Tensor Gauss-Legendre rule for expectations under the uniform law:
    /// points and weights summing to one.
    pub fn expectation_rule(&self, nodes_per_axis: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let d = self.dim();
        if d > 3 {
            return Err(Error::GridDimension(d));
        }
        let gl = GaussLegendre::cached(nodes_per_axis);
        let total = nodes_per_axis.pow(d as u32);
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut p = Vec::with_capacity(d);
            let mut w = 1.0;
            for j in 0..d {
                let k = rem % nodes_per_axis;
                rem /= nodes_per_axis;
                let (a, b) = (self.lower[j], self.upper[j]);
                p.push(0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[k]);
                w *= 0.5 * gl.weights[k];
            }
            points.push(p);
            weights.push(w);
        }
        Ok((points, weights))
    }

    /// Uniform grid including the box corners. `SUP_GRID_POINTS` per axis,
    /// reduced in three or more dimensions so the grid stays near 2^20 points.
    pub fn check_grid(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let d = self.dim();
        let per_axis = if d <= 2 {
            SUP_GRID_POINTS
        } else {
            ((1u64 << 20) as f64).powf(1.0 / d as f64).floor().max(2.0) as usize
        };
        let total = per_axis.pow(d as u32);
        (0..total).map(move |flat| {
            let mut rem = flat;
            (0..d)
                .map(|j| {
                    let k = rem % per_axis;
                    rem /= per_axis;
                    let t = k as f64 / (per_axis - 1) as f64;
                    self.lower[j] + t * (self.upper[j] - self.lower[j])
                })
                .collect()
        })
    }
}

/// A fitted element of a hypothesis space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHypothesis")]
pub struct Hypothesis {
    feature_map: FeatureMap,
    coefficients: Vec<f64>,
}

#[derive(Deserialize)]
struct RawHypothesis {
    feature_map: FeatureMap,
    coefficients: Vec<f64>,
}

impl TryFrom<RawHypothesis> for Hypothesis {
    type Error = Error;

    fn try_from(raw: RawHypothesis) -> Result<Self> {
        Hypothesis::new(raw.feature_map, raw.coefficients)
    }
}

impl Hypothesis {
    pub fn new(feature_map: FeatureMap, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != feature_map.len() {
            return Err(Error::DimensionMismatch {
                expected: feature_map.len(),
                got: coefficients.len(),
            });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("coefficients", "coefficients must be finite"));
        }
        Ok(Self {
            feature_map,
            coefficients,
        })
    }

    pub fn zero(feature_map: FeatureMap) -> Self {
        let p = feature_map.len();
        Self {
            feature_map,
            coefficients: vec![0.0; p],
        }
    }

    pub fn feature_map(&self) -> &FeatureMap {
        &self.feature_map
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.feature_map.dim()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let phi = self.feature_map.features(x)?;
        Ok(dot(&phi, &self.coefficients))
    }

    /// Largest |h(x)| on the domain's check grid.
    pub fn sup_norm(&self, domain: &Domain) -> Result<f64> {
        if domain.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: domain.dim(),
            });
        }
        let mut phi = vec![0.0; self.feature_map.len()];
        let mut best = 0.0f64;
        for x in domain.check_grid() {
            self.feature_map.features_into(&x, &mut phi)?;
            best = best.max(dot(&phi, &self.coefficients).abs());
        }
        Ok(best)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// How to integrate against the input law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum L2Method {
    Grid,
    MonteCarlo { samples: usize, seed: u64, stream: u64 },
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
}

fn check_pair(h1: &Hypothesis, h2: &Hypothesis, domain: &Domain) -> Result<()> {
    for h in [h1, h2] {
        if h.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: h.dim(),
            });
        }
    }
    Ok(())
}

/// `int (h1 - h2)^2 d rho_X` with `rho_X` uniform on `domain`.
pub fn l2_rho_distance(
    h1: &Hypothesis,
    h2: &Hypothesis,
    domain: &Domain,
    method: L2Method,
) -> Result<f64> {
    check_pair(h1, h2, domain)?;
    match method {
        L2Method::Grid => {
            let (points, weights) = domain.expectation_rule(GRID_NODES_PER_AXIS)?;
            let mut acc = 0.0;
            for (x, w) in points.iter().zip(&weights) {
                let diff = h1.evaluate(x)? - h2.evaluate(x)?;
                acc += w * diff * diff;
            }
            Ok(acc)
        }
        L2Method::MonteCarlo {
            samples,
            seed,
            stream,
        } => Ok(l2_rho_distance_mc(h1, h2, domain, samples, RngState::new(seed, stream))?.mean),
    }
}

pub fn l2_rho_distance_mc(
    h1: &Hypothesis,
    h2: &Hypothesis,
    domain: &Domain,
    samples: usize,
    rng: RngState,
) -> Result<MonteCarloEstimate> {
    check_pair(h1, h2, domain)?;
    if samples < 2 {
        return Err(Error::invalid("samples", "monte-carlo needs at least 2 samples"));
    }
    let mut g = rng.generator();
    // Welford accumulation.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..samples {
        let x = domain.sample_with(&mut g);
        let diff = h1.evaluate(&x)? - h2.evaluate(&x)?;
        let v = diff * diff;
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / samples as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn affine_evaluation() {
        let h = Hypothesis::new(FeatureMap::affine(1), vec![0.5, 2.0]).unwrap();
        assert_eq!(h.evaluate(&[1.0]).unwrap(), 2.5);
        let z = Hypothesis::zero(FeatureMap::polynomial(2, 3));
        assert_eq!(z.evaluate(&[0.3, 0.9]).unwrap(), 0.0);
    }

    #[test]
    fn trigonometric_layout() {
        let f = FeatureMap::trigonometric(1, 2);
        assert_eq!(f.len(), 5);
        let phi = f.features(&[0.125]).unwrap();
        let a = TAU * 0.125;
        let expected = [1.0, a.cos(), a.sin(), (2.0 * a).cos(), (2.0 * a).sin()];
        for (p, e) in phi.iter().zip(expected) {
            assert_relative_eq!(*p, e, epsilon = 1e-15);
        }
        let h = Hypothesis::new(f, vec![0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(h.evaluate(&[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn polynomial_counts_monomials() {
        assert_eq!(FeatureMap::polynomial(1, 3).len(), 4);
        assert_eq!(FeatureMap::polynomial(2, 2).len(), 6);
        assert_eq!(FeatureMap::polynomial(3, 2).len(), 10);
        let phi = FeatureMap::polynomial(2, 2).features(&[2.0, 3.0]).unwrap();
        // graded: 1 | x, y | x^2, xy, y^2
        assert_eq!(phi, vec![1.0, 2.0, 3.0, 4.0, 6.0, 9.0]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let h = Hypothesis::zero(FeatureMap::affine(2));
        assert!(matches!(
            h.evaluate(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(Hypothesis::new(FeatureMap::affine(1), vec![1.0]).is_err());
    }

    #[test]
    fn l2_of_identity_is_one_third() {
        let x = Hypothesis::new(FeatureMap::affine(1), vec![0.0, 1.0]).unwrap();
        let zero = Hypothesis::zero(FeatureMap::affine(1));
        let d = l2_rho_distance(&x, &zero, &Domain::unit(1), L2Method::Grid).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-10);
        assert_eq!(l2_rho_distance(&x, &x, &Domain::unit(1), L2Method::Grid).unwrap(), 0.0);
    }

    #[test]
    fn grid_rejects_high_dimension() {
        let h = Hypothesis::zero(FeatureMap::affine(4));
        let e = l2_rho_distance(&h, &h, &Domain::unit(4), L2Method::Grid).unwrap_err();
        assert!(e.to_string().contains("monte-carlo"));
    }

    #[test]
    fn sup_norm_on_grid() {
        let h = Hypothesis::new(FeatureMap::affine(2), vec![1.0, -3.0, 2.0]).unwrap();
        assert_relative_eq!(h.sup_norm(&Domain::unit(2)).unwrap(), 2.0 + 1.0, epsilon = 1e-12);
    }

    #[test]
    fn json_shape() {
        let h = Hypothesis::new(FeatureMap::trigonometric(1, 1), vec![1.0, 2.0, 3.0]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&h).unwrap();
        assert_eq!(v["feature_map"]["kind"], "trigonometric");
        assert_eq!(v["feature_map"]["max_frequency"], 1);
        assert_eq!(v["coefficients"][2], 3.0);
        let back: Hypothesis = serde_json::from_value(v).unwrap();
        assert_eq!(back, h);
        let bad = r#"{"feature_map":{"kind":"affine","dim":1},"coefficients":[1]}"#;
        assert!(serde_json::from_str::<Hypothesis>(bad).is_err());
    }
}
