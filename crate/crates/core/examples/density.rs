// Stable densities: closed forms for alpha = 1, 2 and numerical inversion
// of the characteristic function otherwise.
//
// cargo run --release --example density

use mccr::quadrature::GaussLegendre;
use mccr::stable_noise::{mixture_density, NoiseModel, StableComponent};
use mccr::Result;

/// Integral of the density over `[-T, T]` with `T` leaving `1e-7` mass
/// outside, on geometrically widening panels.
pub fn total_mass(c: &StableComponent) -> Result<f64> {
    let radius = c.tail_radius(1e-7);
    let rule = GaussLegendre::cached(64);
    let mut edges = vec![0.0];
    let mut w = 0.5;
    while *edges.last().unwrap() < radius {
        let next = (edges.last().unwrap() + w).min(radius);
        edges.push(next);
        w *= 1.25;
    }
    let mut mass = 0.0;
    for pair in edges.windows(2) {
        let mut err = None;
        let part = rule.integrate(pair[0], pair[1], |t| match c.density(t) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        mass += 2.0 * part;
    }
    Ok(mass)
}

pub fn run_example() -> Result<Vec<(f64, f64)>> {
    let alphas = [0.5, 1.0, 1.5, 1.9, 2.0];
    let comps: Vec<StableComponent> = alphas
        .iter()
        .map(|&a| StableComponent::new(a, 1.0, 0.0))
        .collect::<Result<_>>()?;

    print!("{:>6}", "t");
    for a in alphas {
        print!("  alpha={a:<5}");
    }
    println!();
    for t in [0.0, 0.5, 1.0, 2.0, 5.0, 20.0] {
        print!("{t:>6}");
        for c in &comps {
            print!("  {:<11.5e}", c.density(t)?);
        }
        println!();
    }

    let mut masses = Vec::new();
    for c in &comps[1..] {
        let m = total_mass(c)?;
        println!("alpha {:.1}: mass {:.9}", c.alpha(), m);
        masses.push((c.alpha(), m));
    }

    let mix = NoiseModel::new(
        vec![StableComponent::new(2.0, 0.5, 0.0)?, StableComponent::cauchy(10.0)?],
        vec![0.9, 0.1],
    )?;
    println!("mixture density at 0: {:.6}", mixture_density(&mix, 0.0)?);
    Ok(masses)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
