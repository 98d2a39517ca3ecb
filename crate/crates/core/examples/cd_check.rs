//! Entropy convexity along a plan-based interpolation on the flat circle:
//! the CD(K,∞) inequality holds for K ≤ 0 and fails for clearly positive K.
use synthric::curvature::cd_convexity_check;
use synthric::heat::{build_witten, heat_flow};
use synthric::mms::{FourierSeries, ModelManifold};

fn main() -> synthric::Result<()> {
    let model = ModelManifold::circle(1.0, FourierSeries::default())?;
    let space = model.discretize(256)?;
    let op = build_witten(&space)?;
    let smooth = |i| heat_flow(&op, &synthric::dirac(&space, i)?, 0.01).map(|s| s.density);
    let (mu0, mu1) = (smooth(236)?, smooth(20)?);
    let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
    for k in [-0.5, 0.0, 0.6] {
        let report = cd_convexity_check(&space, &model, &mu0, &mu1, k, &ts)?;
        println!("K = {k:+.1}: W² = {:.4}, worst slack {:+.4}, passed = {}", report.w2 * report.w2, report.worst_slack, report.passed);
    }
    Ok(())
}
