// Choosing the kernel width from a grid by held-out median absolute
// residual, on a cubic target under Cauchy noise.
//
// cargo run --release --example sigma_selection

use mccr::experiments::generate_with_selector;
use mccr::hypothesis::{l2_rho_distance, Domain, FeatureMap, Hypothesis, L2Method};
use mccr::rng::RngState;
use mccr::solver::{fit_mccr_sigma_grid, SigmaSelection, SolverConfig};
use mccr::stable_noise::{NoiseModel, StableComponent};
use mccr::Result;

pub fn run_example() -> Result<(SigmaSelection, f64)> {
    let space = FeatureMap::polynomial(1, 3);
    let target = Hypothesis::new(space.clone(), vec![1.0, -2.0, 0.5, 3.0])?;
    let noise = NoiseModel::single(StableComponent::cauchy(0.5)?);
    let domain = Domain::unit(1);
    let data = generate_with_selector(&domain, &target, &noise, 2000, RngState::new(8, 0))?;

    let grid = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let sel = fit_mccr_sigma_grid(&space, &data, &grid, &SolverConfig::default(), RngState::new(8, 1))?;
    for (s, score) in grid.iter().zip(&sel.scores) {
        let mark = if *s == sel.sigma { "  <- chosen" } else { "" };
        match score {
            Some(v) => println!("sigma {s:>5}: validation MAE {v:.5}{mark}"),
            None => println!("sigma {s:>5}: fit failed"),
        }
    }
    let err = l2_rho_distance(&sel.report.hypothesis, &target, &domain, L2Method::Grid)?;
    println!("coefficients {:?}", sel.report.hypothesis.coefficients());
    println!("L2 error {err:.3e}");
    Ok((sel, err))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
