//! On the unit round sphere the contraction rate along a meridian lands in the
//! Sturm bracket up to discretization error.
use synthric::curvature::{geometric_grid, sturm_bounds, theta_plus, time_window};
use synthric::heat::build_witten;
use synthric::mms::ModelManifold;

fn main() -> synthric::Result<()> {
    let model = ModelManifold::sphere(1.0, vec![])?;
    let res = 16;
    let space = model.discretize(res)?;
    let op = build_witten(&space)?;
    let labels = space.labels().unwrap().to_vec();
    let (x, y) = (5 * 2 * res, 9 * 2 * res);
    let (t0, t1) = time_window(&op, space.dist(x, y));
    let est = theta_plus(&space, &op, x, y, &geometric_grid(t0, t1, 5)?)?;
    let b = sturm_bounds(&model, labels[x], labels[y])?;
    println!("n = {}, pair ({x},{y}), d = {:.4}", space.n(), est.d);
    println!("θ⁺ = {:.4}, bracket [ρ, ρ + σ tan²(√σ d/2)] = [{:.4}, {:.4}]", est.value, b.lower, b.upper);
    println!("inside with 15% slack: {}", b.contains(est.value, 0.15 * est.value.abs()));
    Ok(())
}
