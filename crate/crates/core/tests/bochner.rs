use std::f64::consts::PI;

use num_bigint::BigUint;
use synthric::bochner::{
    bishop_gromov_packing, sector_constants, angle_delta, smallness_check, finiteness_bound, refined_delta,
    GeometryBudget,
};
use synthric::mms::FiniteMMS;
use synthric::Error;

fn fixture() -> GeometryBudget {
    GeometryBudget {
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
    }
}

#[test]
fn sector_constant_examples() {
    let c = sector_constants(2, 1.0, 0.1).unwrap();
    assert_eq!((c.c1, c.c2, c.delta0), (4.0, 0.5f64.sqrt(), 0.05));
    let tiny = sector_constants(3, 1e-12, 0.4).unwrap();
    assert_eq!(tiny.delta0, 0.2);
    assert!(sector_constants(1, 1.0, 1.0).is_err());
    for n in 2..6 {
        let c = sector_constants(n, 0.7, 3.0).unwrap();
        let cap = 2.0 * (n - 1) as f64 * 0.7;
        assert!((c.c1 - 2.0 * cap).abs() < 1e-12);
        assert!((2.0 * c.c2 * c.c2 - (n - 1) as f64 * 0.7).abs() < 1e-12);
    }
    assert_eq!(sector_constants(3, 1.0, 10.0).unwrap().delta0, PI / 2.0);
}

#[test]
fn angle_delta_branches() {
    let r = angle_delta(&fixture()).unwrap();
    assert_eq!(r.binding, "arctan");
    assert!((r.delta - 0.25f64.atan()).abs() < 1e-12);
    let big_a = angle_delta(&GeometryBudget { a: 1e9, ..fixture() }).unwrap();
    assert_eq!(big_a.binding, "sobolev_a");
    assert!(big_a.delta < 1e-9);
    let huge = GeometryBudget { i0: 0.2, w: 1e6, a: 1e-6, b: 1e-6, lambda1: 1e-6, lambda2: 1e-6, ..fixture() };
    let r = angle_delta(&huge).unwrap();
    assert_eq!((r.binding, r.delta), ("delta0", 0.1));
    assert!(r.delta <= r.sector.delta0);
}

#[test]
fn angle_delta_monotonicity_on_grids() {
    let scales = [0.25, 0.5, 1.0, 2.0, 4.0];
    let delta = |b: GeometryBudget| angle_delta(&b).unwrap().delta;
    for w in scales.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let f = fixture();
        assert!(delta(GeometryBudget { a: hi, ..f.clone() }) <= delta(GeometryBudget { a: lo, ..f.clone() }));
        assert!(delta(GeometryBudget { b: hi, ..f.clone() }) <= delta(GeometryBudget { b: lo, ..f.clone() }));
        assert!(delta(GeometryBudget { lambda2: hi, ..f.clone() }) <= delta(GeometryBudget { lambda2: lo, ..f.clone() }));
        assert!(delta(GeometryBudget { v: hi, ..f.clone() }) <= delta(GeometryBudget { v: lo, ..f.clone() }));
        assert!(delta(GeometryBudget { w: hi, ..f.clone() }) >= delta(GeometryBudget { w: lo, ..f.clone() }));
        assert!(delta(GeometryBudget { i0: hi, ..f.clone() }) >= delta(GeometryBudget { i0: lo, ..f }));
    }
}

#[test]
fn packing_examples() {
    assert_eq!(bishop_gromov_packing(1.0, 1.0, 1e-12, 3.0).unwrap(), 27);
    for l3 in [0.0, 1.0, 5.0] {
        assert!(bishop_gromov_packing(1.0, 1.0, l3, 3.0).unwrap() >= 1);
    }
    assert!(bishop_gromov_packing(1.0, 1.5, 1.0, 3.0).is_err());
}

#[test]
fn packing_monotonicity() {
    let l = |d, delta, l3, n| bishop_gromov_packing(d, delta, l3, n).unwrap();
    for pair in [0.1, 0.2, 0.4, 0.8].windows(2) {
        assert!(l(1.0, pair[1], 1.0, 3.0) <= l(1.0, pair[0], 1.0, 3.0));
    }
    for pair in [1.0, 1.5, 2.0, 3.0].windows(2) {
        assert!(l(pair[0], 0.5, 1.0, 3.0) <= l(pair[1], 0.5, 1.0, 3.0));
        assert!(l(1.0, 0.5, pair[0], 3.0) <= l(1.0, 0.5, pair[1], 3.0));
        assert!(l(1.0, 0.5, 1.0, pair[0] + 1.0) <= l(1.0, 0.5, 1.0, pair[1] + 1.0));
    }
}

#[test]
fn finiteness_chain() {
    let r = finiteness_bound(&fixture()).unwrap();
    let fact = (1..=r.l).fold(BigUint::from(1u8), |acc, k| acc * k);
    assert_eq!(r.l1, fact);
    assert!(r.delta <= r.delta0);
    let again = finiteness_bound(&fixture()).unwrap();
    assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
    // A diameter below δ leaves a single ball.
    let small = finiteness_bound(&GeometryBudget { d: 0.01, ..fixture() }).unwrap();
    assert_eq!((small.l, small.l1.clone()), (1, BigUint::from(1u8)));
    assert!(matches!(
        finiteness_bound(&GeometryBudget { lambda3: None, ..fixture() }),
        Err(Error::MissingInput(_))
    ));
}

#[test]
fn refined_delta_examples() {
    let r = refined_delta(&GeometryBudget { w: 2.0, ..fixture() }, Some(1e-9), Some(4.0)).unwrap();
    assert_eq!((r.delta, r.delta_binding, r.epsilon), (1e-9, "delta1", 1.0));
    let stiff = refined_delta(&GeometryBudget { lambda2: 1e12, ..fixture() }, Some(1.0), Some(1.0)).unwrap();
    assert!(stiff.delta < 1e-9);
    assert!(matches!(refined_delta(&fixture(), Some(1.0), None), Err(Error::MissingInput("C_G"))));
    assert!(matches!(
        refined_delta(&GeometryBudget { e: None, ..fixture() }, Some(1.0), Some(1.0)),
        Err(Error::MissingInput("E"))
    ));
}

#[test]
fn smallness_examples() {
    let space = FiniteMMS::new(vec![0.0, 1.0, 1.0, 0.0], vec![0.5, 0.5]).unwrap();
    let pass = smallness_check(&[-1.0, -1.0], &space, 1.0, 1.0, 1.0, 3, 4).unwrap();
    assert!(pass.passed && pass.norm == 0.0 && pass.margin == pass.threshold);
    let fail = smallness_check(&[0.0, 0.0], &space, 1.0, 1.0, 1.0, 3, 4).unwrap();
    assert!((fail.norm - 1.0).abs() < 1e-12 && !fail.passed);
    assert_eq!(fail.threshold, 0.25);
    assert_eq!(smallness_check(&[0.0, 0.0], &space, 1.0, 1.0, 1.0, 3, 2).unwrap().threshold, 0.5);
    assert!(smallness_check(&[0.0, 0.0], &space, 1.0, 1.0, 1.0, 3, 3).is_err());
}
