//! Exact quadratic Wasserstein distance on a discretized circle, plus a
//! displacement interpolation between two bumps.
use synthric::mms::{FourierSeries, ModelManifold, ProbVector};
use synthric::transport::{check_coupling, displacement_interpolate, w2_exact};

fn main() -> synthric::Result<()> {
    let model = ModelManifold::circle(1.0, FourierSeries::default())?;
    let space = model.discretize(64)?;

    let (w, _) = w2_exact(&space, &synthric::dirac(&space, 0)?, &synthric::dirac(&space, 16)?)?;
    println!("W(δ_0, δ_16) = {w:.6}  (geodesic distance {:.6})", space.dist(0, 16));

    let bump = |c: usize| {
        ProbVector::normalized((0..64).map(|i| if space.dist(i, c) < 0.3 { 1.0 } else { 0.0 }).collect())
    };
    let (mu, nu) = (bump(12)?, bump(32)?);
    let (w, plan) = w2_exact(&space, &mu, &nu)?;
    println!("W(bump_12, bump_32) = {w:.6}; coupling violations: {}", check_coupling(&space, &plan).len());

    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let mid = displacement_interpolate(&space, &plan, t, Some(&model))?;
        let support = mid.support();
        println!("t = {t:.2}: support {:?}..{:?}", support.first().unwrap(), support.last().unwrap());
    }
    Ok(())
}
