//! The explicit constants chain: threshold δ, packing count L and the group
//! order bound L!, plus the variant threshold.
use synthric::bochner::{angle_delta, finiteness_bound, refined_delta, sector_constants, GeometryBudget};

fn main() -> synthric::Result<()> {
    let budget = GeometryBudget {
        n: 3,
        big_n: 3.0,
        i0: 10.0,
        lambda1: 1.0,
        lambda2: 1.0,
        lambda3: Some(1.0),
        v: 1.0,
        d: 1.0,
        e: Some(1.0),
        w: 1.0,
        a: 1.0,
        b: 1.0,
    };
    println!("{:?}", sector_constants(3, 1.0, 10.0)?);
    let delta = angle_delta(&budget)?;
    println!("δ = {} (binding: {}, arctan(1/4) = {})", delta.delta, delta.binding, 0.25f64.atan());
    let report = finiteness_bound(&budget)?;
    let digits = report.l1.to_string().len();
    println!("L = {}, L! has {digits} digits", report.l);
    let refined = refined_delta(&budget, Some(0.01), Some(4.0))?;
    println!("variant: δ = {:.3e} ({}), ε = {}", refined.delta, refined.delta_binding, refined.epsilon);
    Ok(())
}
