// Convergence-rate study: median L2 error of MCCR and OLS over n = 2^7..2^13
// under Gaussian, Cauchy and contaminated-Gaussian noise, with the fitted
// log-log slope per method.
//
// cargo run --release --example rate_study

use mccr::experiments::{run_rate_study, Estimator, ExperimentSpec, RateStudyResult};
use mccr::hypothesis::{Domain, FeatureMap, Hypothesis};
use mccr::stable_noise::{NoiseModel, StableComponent};
use mccr::Result;

pub const SIGMA_GRID: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

pub fn gaussian_study() -> Result<ExperimentSpec> {
    let target = Hypothesis::new(FeatureMap::affine(1), vec![0.5, 2.0])?;
    let noise = NoiseModel::single(StableComponent::new(2.0, 0.5, 0.0)?);
    let mut spec = ExperimentSpec::new(
        Domain::unit(1),
        target,
        noise,
        vec![Estimator::Mccr { sigma: vec![2.0] }, Estimator::Ols],
    );
    spec.seed = 20_240_601;
    Ok(spec)
}

pub fn cauchy_study() -> Result<ExperimentSpec> {
    let target = Hypothesis::new(FeatureMap::affine(1), vec![0.5, 2.0])?;
    let noise = NoiseModel::single(StableComponent::cauchy(1.0)?);
    let mut spec = ExperimentSpec::new(
        Domain::unit(1),
        target,
        noise,
        vec![Estimator::Mccr { sigma: SIGMA_GRID.to_vec() }, Estimator::Ols],
    );
    spec.seed = 20_240_602;
    Ok(spec)
}

/// Trigonometric target under 0.95 N(0, 1) + 0.05 N(0, 10^4).
pub fn contaminated_study() -> Result<ExperimentSpec> {
    let target = Hypothesis::new(FeatureMap::trigonometric(1, 1), vec![0.5, 1.0, -1.5])?;
    let noise = NoiseModel::contaminated_gaussian(0.05, 1.0, 1e4)?;
    let mut spec = ExperimentSpec::new(
        Domain::unit(1),
        target,
        noise,
        vec![Estimator::Mccr { sigma: SIGMA_GRID.to_vec() }, Estimator::Ols],
    );
    spec.seed = 20_240_603;
    Ok(spec)
}

pub fn report(label: &str, res: &RateStudyResult) {
    println!("== {label}");
    print!("{}", res.medians_csv());
    for s in &res.summaries {
        match (s.slope, s.slope_std_error) {
            (Some(b), Some(se)) => println!(
                "{:>6}: slope {b:.3} +- {:.3}  monotone {}  failures {}",
                s.method,
                2.0 * se,
                s.monotone,
                s.failures
            ),
            _ => println!("{:>6}: no slope", s.method),
        }
    }
}

pub fn run_example() -> Result<Vec<(&'static str, RateStudyResult)>> {
    let mut out = Vec::new();
    for (label, spec) in [
        ("gaussian", gaussian_study()?),
        ("cauchy", cauchy_study()?),
        ("contaminated", contaminated_study()?),
    ] {
        let t = std::time::Instant::now();
        let res = run_rate_study(&spec)?;
        report(label, &res);
        println!("({:.1} s)", t.elapsed().as_secs_f64());
        out.push((label, res));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
