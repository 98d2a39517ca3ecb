//! The cover-based injection: isometries are recorded by where they send the
//! centres of an a-cover, so |Iso| is at most N! when the map is injective.
use synthric::isometry::{covering_number, default_tolerance, enumerate_isometries, injection_map, pigeonhole_bound};
use synthric::FiniteMMS;

fn main() -> synthric::Result<()> {
    let space = FiniteMMS::cycle(12, std::f64::consts::PI / 6.0);
    let group = enumerate_isometries(&space, default_tolerance(&space))?;
    for a in [0.3, 1.5] {
        let cover = covering_number(&space, a)?;
        let report = injection_map(&space, &group, &cover.centers, a, None)?;
        println!(
            "a = {a}: N = {} centres {:?}, N! = {}, |Iso| = {}, injective = {}",
            cover.count(),
            cover.centers,
            pigeonhole_bound(cover.count() as u64),
            group.order(),
            report.injective
        );
        if let Some(c) = report.collision {
            println!("  elements {} and {} collide (discrepancy {})", c.first, c.second, c.discrepancy);
        }
    }
    Ok(())
}
