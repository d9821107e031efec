// Draw from a Gaussian / Cauchy mixture and compare the empirical
// characteristic function with the exact one.
//
// cargo run --release --example sample_noise

use mccr::rng::RngState;
use mccr::stable_noise::{characteristic_fn, sample_mixture, NoiseModel, StableComponent};
use mccr::Result;

pub struct SampleSummary {
    pub n: usize,
    pub median: f64,
    pub tail_fraction: f64,
    /// `sup_t |ECF(t) - phi(t)|` on `t = -5, -4.5, ..., 5`.
    pub ecf_gap: f64,
}

pub fn ecf_gap(noise: &NoiseModel, draws: &[f64]) -> f64 {
    let n = draws.len() as f64;
    (0..=20)
        .map(|k| {
            let t = -5.0 + 0.5 * k as f64;
            let (re, im) = draws
                .iter()
                .fold((0.0, 0.0), |(re, im), x| (re + (t * x).cos(), im + (t * x).sin()));
            let exact = characteristic_fn(noise, t);
            ((re / n - exact.re).powi(2) + (im / n - exact.im).powi(2)).sqrt()
        })
        .fold(0.0, f64::max)
}

pub fn run_example() -> Result<SampleSummary> {
    let noise = NoiseModel::new(
        vec![StableComponent::new(2.0, 0.5, 0.0)?, StableComponent::cauchy(10.0)?],
        vec![0.9, 0.1],
    )?;
    let n = 100_000;
    let mut draws = sample_mixture(&noise, RngState::new(42, 0), n);
    let gap = ecf_gap(&noise, &draws);
    let tail = draws.iter().filter(|x| x.abs() > 20.0).count() as f64 / n as f64;
    draws.sort_by(f64::total_cmp);
    let summary = SampleSummary {
        n,
        median: draws[n / 2],
        tail_fraction: tail,
        ecf_gap: gap,
    };
    println!("n = {}", summary.n);
    println!("median          {:+.4}", summary.median);
    println!("P(|eps| > 20)   {:.4}", summary.tail_fraction);
    println!(
        "sup ECF gap     {:.5}  (5/sqrt(n) = {:.5})",
        summary.ecf_gap,
        5.0 / (n as f64).sqrt()
    );
    for q in [0.01, 0.25, 0.75, 0.99] {
        println!("q{:<4}           {:+.3}", q, draws[(q * n as f64) as usize]);
    }
    Ok(summary)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
