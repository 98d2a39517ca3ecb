//! Heat flow of a Dirac mass under the weighted Laplacian: mass stays one,
//! entropy grows, and the flow relaxes to the normalized reference measure.
use synthric::heat::{build_witten, contraction_curve, entropy, heat_flow};
use synthric::mms::{FourierSeries, ModelManifold};

fn main() -> synthric::Result<()> {
    let v = FourierSeries { cos: vec![(1, 0.5)], ..Default::default() };
    let space = ModelManifold::circle(1.0, v)?.discretize(128)?;
    let op = build_witten(&space)?;
    let start = synthric::dirac(&space, 0)?;

    for t in [1e-3, 1e-2, 1e-1, 1.0, 10.0] {
        let state = heat_flow(&op, &start, t)?;
        let p = state.density.as_slice();
        let mass: f64 = p.iter().sum();
        println!("t = {t:<6} mass = {mass:.15} entropy = {:.6}", entropy(&space, &state.density));
    }

    let total = space.total_mass();
    let far = heat_flow(&op, &start, 200.0)?;
    let tv: f64 = far.density.as_slice().iter().zip(space.weight()).map(|(p, m)| (p - m / total).abs()).sum();
    println!("total variation to m/|m| at t = 200: {tv:.2e}");

    for (t, w) in contraction_curve(&space, &op, 0, 20, &[1e-3, 1e-2, 1e-1])? {
        println!("W(H_t δ_0, H_t δ_20) at t = {t}: {w:.6}");
    }
    Ok(())
}
