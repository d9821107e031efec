// One gross outlier on an exact line: MCCR ignores it, OLS is dragged
// along, Huber sits in between.
//
// cargo run --release --example fit_outlier

use mccr::hypothesis::FeatureMap;
use mccr::loss::Dataset;
use mccr::rng::RngState;
use mccr::solver::{fit_huber_default, fit_mccr, fit_ols, FitReport, SolverConfig};
use mccr::Result;

pub struct Fits {
    pub mccr: FitReport,
    pub ols: FitReport,
    pub huber: FitReport,
}

/// `y = x` on `x = 0, 0.1, ..., 1` with `y(at) = 1000`.
pub fn corrupted_line(at: usize) -> Result<Dataset> {
    let xs: Vec<Vec<f64>> = (0..=10).map(|i| vec![i as f64 / 10.0]).collect();
    let ys = xs
        .iter()
        .enumerate()
        .map(|(i, x)| if i == at { 1e3 } else { x[0] })
        .collect();
    Dataset::new(xs, ys)
}

pub fn run_example() -> Result<Fits> {
    let data = corrupted_line(9)?;
    let space = FeatureMap::affine(1);
    let cfg = SolverConfig::default();
    let fits = Fits {
        mccr: fit_mccr(&space, &data, 1.0, &cfg, RngState::new(1, 0))?,
        ols: fit_ols(&space, &data)?,
        huber: fit_huber_default(&space, &data, &cfg)?,
    };
    for (name, f) in [("mccr", &fits.mccr), ("ols", &fits.ols), ("huber", &fits.huber)] {
        let c = f.hypothesis.coefficients();
        println!("{name:>6}: intercept {:+10.4}  slope {:+10.4}  iterations {}", c[0], c[1], f.iterations);
    }
    println!("mccr objective trace: {:?}", fits.mccr.objective_trace);
    Ok(fits)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
