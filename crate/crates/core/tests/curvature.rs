mod common;

use std::f64::consts::PI;

use synthric::curvature::{
    beta_distortion, cd_convexity_check, geometric_grid, rho_gamma, ricci_infty, ricci_n, sigma_gamma, sturm_bounds,
    theta_plus, theta_star, SturmBounds, ThetaEstimate, ThetaStarOptions,
};
use synthric::heat::{build_witten, heat_flow};
use synthric::mms::{dirac, FourierSeries, ModelManifold};
use synthric::Error;

use common::*;

fn full_window(h: f64, d: f64, k: usize) -> Vec<f64> {
    geometric_grid(2.0 * h * h, d * d, k).unwrap()
}

#[test]
fn flat_circle_has_zero_theta() {
    let space = uniform_circle().discretize(256).unwrap();
    let op = build_witten(&space).unwrap();
    let (x, y) = (30, 42);
    let d = space.dist(x, y);
    assert!((d - 0.3).abs() < 0.02);
    let est = theta_plus(&space, &op, x, y, &full_window(op.mesh_h(), d, 6)).unwrap();
    assert!(est.value.abs() <= 0.05, "{}", est.value);
    assert!(!est.low_confidence || est.value.abs() < 1e-3);
}

#[test]
fn theta_is_symmetric_and_refittable() {
    let space = weighted_circle().discretize(128).unwrap();
    let op = build_witten(&space).unwrap();
    let grid = full_window(op.mesh_h(), space.dist(50, 58), 5);
    let a = theta_plus(&space, &op, 50, 58, &grid).unwrap();
    let b = theta_plus(&space, &op, 58, 50, &grid).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.w, b.w);
    let (value, residual) = ThetaEstimate::refit(&a.t_grid, &a.raw, a.order).unwrap();
    assert_eq!(value, a.value);
    assert_eq!(residual, a.fit_residual);
    assert!(a.fit_residual >= 0.0);
}

#[test]
fn theta_preconditions() {
    let space = weighted_circle().discretize(64).unwrap();
    let op = build_witten(&space).unwrap();
    let h = op.mesh_h();
    assert!(matches!(theta_plus(&space, &op, 3, 3, &[0.1]), Err(Error::Precondition(_))));
    // Times below 2h² are sub-mesh transients.
    assert!(theta_plus(&space, &op, 0, 8, &[h * h, 0.1]).is_err());
    assert!(theta_plus(&space, &op, 0, 8, &[2.0 * h * h, 10.0]).is_err());
}

/// On a 16-cell ring of length 1 the exact discrete contraction at `t = 2h²`
/// (computed independently with a generic LP solver) is far from the
/// continuum value 0: the heat kernels wrap around the ring.
#[test]
fn small_ring_matches_independent_lp() {
    let ring = ModelManifold::circle(0.5 / PI, FourierSeries::default()).unwrap();
    let space = ring.discretize(16).unwrap();
    let op = build_witten(&space).unwrap();
    let h = op.mesh_h();
    let est = theta_plus(&space, &op, 0, 3, &[2.0 * h * h, 4.0 * h * h]).unwrap();
    assert!((est.raw[0] - 10.173292268167273).abs() < 1e-6, "{}", est.raw[0]);
    // Refining the same ring removes the wrap-around effect.
    let fine = ring.discretize(64).unwrap();
    let op = build_witten(&fine).unwrap();
    let est = theta_plus(&fine, &op, 0, 3, &full_window(op.mesh_h(), fine.dist(0, 3), 4)).unwrap();
    assert!(est.value.abs() < 0.05, "{}", est.value);
}

#[test]
fn theta_star_on_the_weighted_circle() {
    let model = weighted_circle();
    let space = model.discretize(256).unwrap();
    let op = build_witten(&space).unwrap();
    let opts = ThetaStarOptions { t_points: 4, window_fraction: 0.5, workers: 1, ..Default::default() };
    let ts = theta_star(&space, &op, 128, &[0.2, 0.1], &opts).unwrap();
    assert_eq!(ts.per_radius.len(), 2);
    assert_eq!(ts.value, ts.per_radius[1].value);
    assert!((ts.value - 0.5).abs() <= 0.15 * 0.5, "{}", ts.value);
    let err = theta_star(&space, &op, 128, &[0.1, 0.2], &opts).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
    // Radii below three cells are rejected.
    assert!(theta_star(&space, &op, 128, &[0.05], &opts).is_err());
}

#[test]
fn ricci_closed_forms() {
    let circle = weighted_circle();
    assert!((ricci_infty(&circle, [PI, 0.0], [1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
    assert!((ricci_n(&circle, [PI / 2.0, 0.0], [1.0, 0.0], 2.0).unwrap() + 0.25).abs() < 1e-15);
    assert!(ricci_n(&circle, [0.3, 0.0], [1.0, 0.0], 1.0).is_err());
    let sphere = ModelManifold::sphere(1.0, vec![]).unwrap();
    assert!((ricci_infty(&sphere, [1.0, 2.0], [0.6, 0.8]).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(ricci_n(&sphere, [1.0, 2.0], [1.0, 0.0], 2.0).unwrap(), 1.0);
    assert!(ricci_infty(&sphere, [1.0, 2.0], [0.0, 0.0]).is_err());
    let torus = ModelManifold::torus(1.0, 2.0, FourierSeries::default(), FourierSeries::default()).unwrap();
    assert_eq!(ricci_infty(&torus, [0.2, 0.3], [0.0, 1.0]).unwrap(), 0.0);
}

#[test]
fn path_averages() {
    let circle = weighted_circle();
    let (p, q) = ([2.8, 0.0], [3.5, 0.0]);
    let path = circle.geodesic(p, q, 1000).unwrap();
    let exact = (-0.5 * q[0].sin() + 0.5 * p[0].sin()) / 0.7;
    assert!((rho_gamma(&circle, &path).unwrap() - exact).abs() < 1e-6);
    assert_eq!(sigma_gamma(&circle, &path), 0.0);
    for (r, sigma) in [(1.0, 1.0), (2.0, 0.25)] {
        let sphere = ModelManifold::sphere(r, vec![]).unwrap();
        let path = sphere.geodesic([0.5, 0.0], [1.5, 1.0], 200).unwrap();
        assert!((rho_gamma(&sphere, &path).unwrap() - sigma).abs() < 1e-12);
        assert_eq!(sigma_gamma(&sphere, &path), sigma);
    }
}

#[test]
fn sturm_bound_examples() {
    let circle = weighted_circle();
    let b = sturm_bounds(&circle, [2.9, 0.0], [3.3, 0.0]).unwrap();
    assert_eq!(b.lower, b.upper);
    let sphere = ModelManifold::sphere(1.0, vec![]).unwrap();
    let b = sturm_bounds(&sphere, [0.5, 0.0], [1.5, 0.0]).unwrap();
    assert!((b.lower - 1.0).abs() < 1e-12);
    assert!((b.upper - (1.0 + 0.5f64.tan().powi(2))).abs() < 1e-12);
    assert!((b.upper - 1.298).abs() < 1e-3);
    let near = sturm_bounds(&sphere, [0.005, 0.0], [PI - 0.005, 0.0]).unwrap();
    assert!(near.upper_is_finite() && near.upper > 4e4);
    assert!(!SturmBounds::new(1.0, 1.0, PI).unwrap().upper_is_finite());
    assert!(sturm_bounds(&sphere, [0.0, 0.0], [PI, 0.0]).is_err());
}

#[test]
fn beta_examples() {
    assert_eq!(beta_distortion(0.0, 3.0, 0.3, 2.0).unwrap(), 1.0);
    assert_eq!(beta_distortion(1.0, 2.0, 0.5, 1.5 * PI).unwrap(), f64::INFINITY);
    let v = beta_distortion(-1.0, 2.0, 0.5, 1.0).unwrap();
    assert!((v - 0.886_81).abs() < 1e-5);
    for k in [-2.0f64, -0.5, 0.5, 2.0] {
        assert!((beta_distortion(k, 3.0, 0.4, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        // t → 0 limit: (α / sin α)^{N−1}, with sinh for K < 0.
        let alpha = (k.abs() / 2.0).sqrt();
        let s = if k > 0.0 { alpha.sin() } else { alpha.sinh() };
        let limit = (alpha / s).powi(2);
        assert!((beta_distortion(k, 3.0, 0.0, 1.0).unwrap() - limit).abs() < 1e-12);
    }
    assert!(beta_distortion(1.0, 1.0, 0.5, 1.0).is_err());
}

#[test]
fn cd_check_on_the_flat_circle() {
    let model = uniform_circle();
    let space = model.discretize(256).unwrap();
    let op = build_witten(&space).unwrap();
    let smooth = |i| heat_flow(&op, &dirac(&space, i).unwrap(), 0.01).unwrap().density;
    let report = cd_convexity_check(&space, &model, &smooth(100), &smooth(140), 0.0, &[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
    assert!(report.passed, "{report:?}");
    let ends: Vec<f64> = report.points.iter().filter(|p| p.t == 0.0 || p.t == 1.0).map(|p| p.slack).collect();
    assert_eq!(ends, vec![0.0, 0.0]);
}
