//! Contraction-rate curvature between two points of a weighted circle,
//! compared with the closed-form lower bound along the arc.
use synthric::curvature::{geometric_grid, sturm_bounds, theta_plus, time_window};
use synthric::heat::build_witten;
use synthric::mms::{FourierSeries, ModelManifold};

fn main() -> synthric::Result<()> {
    let v = FourierSeries { cos: vec![(1, 0.5)], ..Default::default() };
    let model = ModelManifold::circle(1.0, v)?;
    let space = model.discretize(256)?;
    let op = build_witten(&space)?;
    let labels = space.labels().unwrap().to_vec();

    for (x, y) in [(120, 136), (0, 16), (60, 76)] {
        let (t0, t1) = time_window(&op, space.dist(x, y));
        let est = theta_plus(&space, &op, x, y, &geometric_grid(t0, t1, 6)?)?;
        let bounds = sturm_bounds(&model, labels[x], labels[y])?;
        println!(
            "pair ({x:>3},{y:>3}) d = {:.4}  θ⁺ = {:+.4}  ρ = {:+.4}  residual {:.1e}{}",
            est.d,
            est.value,
            bounds.lower,
            est.fit_residual,
            if est.low_confidence { "  (low confidence)" } else { "" }
        );
    }
    Ok(())
}
