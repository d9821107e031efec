// Contamination study: 95% N(0, 1) inliers and 5% N(0, 10^4) outliers.
// Tabulates the MCCR / OLS median-error ratio per sample size, with a
// clean (contamination 0) run for reference.
//
// cargo run --release --example outlier_study

use mccr::experiments::{run_outlier_study, Estimator, ExperimentSpec, OutlierStudy};
use mccr::hypothesis::{Domain, FeatureMap, Hypothesis};
use mccr::stable_noise::NoiseModel;
use mccr::Result;

pub fn spec(contamination: f64) -> Result<ExperimentSpec> {
    let target = Hypothesis::new(FeatureMap::affine(1), vec![0.5, 2.0])?;
    let noise = NoiseModel::contaminated_gaussian(contamination, 1.0, 1e4)?;
    let mut spec = ExperimentSpec::new(
        Domain::unit(1),
        target,
        noise,
        vec![
            Estimator::Mccr { sigma: vec![0.5, 1.0, 2.0, 4.0] },
            Estimator::Ols,
        ],
    );
    spec.sizes = vec![256, 1024, 4096];
    spec.seed = 5;
    Ok(spec)
}

pub fn run_example() -> Result<(OutlierStudy, OutlierStudy)> {
    let dirty = run_outlier_study(&spec(0.05)?)?;
    let clean = run_outlier_study(&spec(0.0)?)?;
    for (label, s) in [("contaminated", &dirty), ("clean", &clean)] {
        println!("== {label} (weight {})", s.contamination);
        print!("{}", s.to_csv());
    }
    Ok((dirty, clean))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
