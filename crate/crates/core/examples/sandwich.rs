// Population excess risk of a shifted line and the two-sided bound
// `c * |f - f*|^2 <= excess <= |f - f*|^2`, for several noise laws and
// kernel widths.
//
// cargo run --release --example sandwich

use mccr::hypothesis::{Domain, FeatureMap, Hypothesis};
use mccr::risk_oracle::{excess_risk_direct, verify_sandwich, RiskProblem, SandwichReport};
use mccr::stable_noise::{NoiseModel, StableComponent};
use mccr::Result;

pub fn families() -> Result<Vec<(&'static str, NoiseModel)>> {
    Ok(vec![
        ("gaussian", NoiseModel::single(StableComponent::new(2.0, 0.5, 0.0)?)),
        ("cauchy", NoiseModel::single(StableComponent::cauchy(1.0)?)),
        ("alpha=1.5", NoiseModel::single(StableComponent::new(1.5, 1.0, 0.0)?)),
        (
            "mixture",
            NoiseModel::new(
                vec![StableComponent::new(2.0, 0.5, 0.0)?, StableComponent::cauchy(1.0)?],
                vec![0.9, 0.1],
            )?,
        ),
    ])
}

pub fn run_example() -> Result<Vec<SandwichReport>> {
    let target = Hypothesis::new(FeatureMap::affine(1), vec![0.5, 2.0])?;
    let candidate = Hypothesis::new(FeatureMap::affine(1), vec![-1.0, 3.5])?;
    let mut reports = Vec::new();
    println!("{:>10} {:>5} {:>12} {:>12} {:>12} {:>12}", "noise", "sigma", "c*l2", "excess", "direct", "l2");
    for (name, noise) in families()? {
        for sigma in [0.5, 1.0, 2.0] {
            let p = RiskProblem::new(noise.clone(), target.clone(), candidate.clone(), sigma, 10.0, Domain::unit(1))?;
            let r = verify_sandwich(&p)?;
            let direct = excess_risk_direct(&p)?;
            println!(
                "{name:>10} {sigma:>5} {:>12.4e} {:>12.6} {:>12.6} {:>12.6} {}",
                r.constant_c * r.l2_distance,
                r.excess_risk,
                direct,
                r.l2_distance,
                if r.holds() { "ok" } else { "VIOLATED" }
            );
            reports.push(r);
        }
    }
    Ok(reports)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
