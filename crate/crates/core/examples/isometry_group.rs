//! Isometry groups of a few finite spaces, with displacements and the
//! rigidity scale.
use synthric::isometry::{default_tolerance, displacement, enumerate_isometries, rigidity_scan};
use synthric::FiniteMMS;

fn main() -> synthric::Result<()> {
    let mut perturbed = FiniteMMS::cycle(6, 1.0);
    let mut w = perturbed.weight().to_vec();
    w[0] *= 1.1;
    perturbed = FiniteMMS::new(perturbed.dist_matrix().to_vec(), w)?;

    for (name, space) in [
        ("C6", FiniteMMS::cycle(6, 1.0)),
        ("C6, heavier vertex 0", perturbed),
        ("flat torus 2x3", FiniteMMS::flat_torus_grid(2, 3, 1.0, 1.5)),
    ] {
        let group = enumerate_isometries(&space, default_tolerance(&space))?;
        let lambda = rigidity_scan(&space, &group)?;
        println!("{name}: |Iso| = {}, generators {}, λ = {lambda}", group.order(), group.generators.len());
        for phi in group.elements.iter().take(4) {
            println!("  {:?} displaces by {}", phi.perm, displacement(&space, phi)?.delta_phi);
        }
    }
    Ok(())
}
