//! Gauss-Legendre rules, composite rules with panel doubling, and adaptive
//! Simpson (used as an independent cross-check).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the three-term Legendre recurrence.
    fn compute(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared, lazily built rule with `n` points.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::compute(n)))
            .clone()
    }

    /// Integrate `f` over [a, b] with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Flattened composite Gauss-Legendre rule: `panels` equal panels of
/// `per_panel` points each over [a, b].
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, per_panel: usize) -> Self {
        let gl = GaussLegendre::cached(per_panel);
        let width = (b - a) / panels as f64;
        let mut points = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for k in 0..panels {
            let lo = a + width * k as f64;
            let mid = lo + 0.5 * width;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                points.push(mid + 0.5 * width * x);
                weights.push(0.5 * width * w);
            }
        }
        Self { points, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Stopping rule for panel doubling.
#[derive(Debug, Clone, Copy)]
pub struct Refinement {
    pub initial_panels: usize,
    pub per_panel: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_doublings: u32,
}

impl Refinement {
    /// Repeatedly evaluate `estimate(panels)` with doubled panel counts until
    /// two successive values agree within tolerance.
    pub fn run<F: FnMut(usize) -> f64>(&self, mut estimate: F) -> Result<f64> {
        let mut panels = self.initial_panels.max(1);
        let mut previous = estimate(panels);
        let mut current = previous;
        let mut last_diff = f64::INFINITY;
        for _ in 0..self.max_doublings {
            panels *= 2;
            let next = estimate(panels);
            last_diff = (next - current).abs();
            previous = current;
            current = next;
            if last_diff <= self.abs_tol.max(self.rel_tol * current.abs()) {
                return Ok(current);
            }
            if !current.is_finite() {
                break;
            }
        }
        Err(Error::Quadrature {
            estimate: current,
            previous,
            achieved: last_diff,
        })
    }

    /// Integrate a scalar function over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> Result<f64> {
        let per_panel = self.per_panel;
        self.run(|panels| CompositeRule::new(a, b, panels, per_panel).integrate(&mut f))
    }
}

/// Adaptive Simpson on [a, b] with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_rules_match_tables() {
        let gl = GaussLegendre::cached(2);
        assert_relative_eq!(gl.nodes[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(gl.weights[0], 1.0, epsilon = 1e-15);
        let gl = GaussLegendre::cached(3);
        assert_relative_eq!(gl.nodes[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(gl.weights[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn weights_sum_to_two_for_large_rules() {
        for n in [64, 513, 2048] {
            let gl = GaussLegendre::cached(n);
            let s: f64 = gl.weights.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-12);
            assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let gl = GaussLegendre::cached(5);
        // degree 9 is exact for 5 points
        let v = gl.integrate(0.0, 2.0, |x| x.powi(9));
        assert_relative_eq!(v, 2f64.powi(10) / 10.0, epsilon = 1e-12);
    }

    #[test]
    fn refinement_converges_on_oscillatory_integrand() {
        let r = Refinement {
            initial_panels: 4,
            per_panel: 64,
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_doublings: 10,
        };
        let v = r.integrate(0.0, 50.0, |x| (3.0 * x).cos()).unwrap();
        assert_relative_eq!(v, (150.0f64).sin() / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn refinement_reports_failure() {
        let r = Refinement {
            initial_panels: 1,
            per_panel: 2,
            abs_tol: 0.0,
            rel_tol: 0.0,
            max_doublings: 2,
        };
        assert!(matches!(
            r.integrate(0.0, 1.0, |x| x.sqrt()),
            Err(Error::Quadrature { .. })
        ));
    }

    #[test]
    fn simpson_agrees_with_gauss() {
        let f = |x: f64| (-x * x).exp() * x.cos();
        let s = adaptive_simpson(&f, -3.0, 3.0, 1e-13, 40);
        let g = GaussLegendre::cached(256).integrate(-3.0, 3.0, f);
        assert_relative_eq!(s, g, epsilon = 1e-11);
    }
}
