//! Acceptance suite: one check per criterion, each printing a single
//! `criterion N: PASS|FAIL ...` line. Runs with its own `main` so the lines are
//! always visible; a substring argument selects criteria, e.g.
//! `cargo test --test acceptance -- criterion_03`.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synthric::bochner::{sector_constants, angle_delta, packing_ratio, finiteness_bound, GeometryBudget};
use synthric::curvature::{
    beta_distortion, cd_convexity_check, geometric_grid, sturm_bounds, theta_plus, theta_star, ThetaStarOptions,
};
use synthric::heat::{build_witten, entropy, heat_flow};
use synthric::isometry::{
    covering_number, default_tolerance, enumerate_isometries, injection_map, pigeonhole_bound,
};
use synthric::mms::{dirac, FiniteMMS, ModelManifold, ProbVector};
use synthric::transport::w2_exact;

use common::*;

fn verdict(id: u32, pass: bool, detail: String) {
    println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

fn criterion_01_weighted_circle_identity() {
    let start = Instant::now();
    let model = weighted_circle();
    let space = model.discretize(256).unwrap();
    let op = build_witten(&space).unwrap();
    let h = op.mesh_h();
    let dv = |theta: f64| -0.5 * theta.sin();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    // Ten pairs straddling index 128 (θ = π) with separations of 9..18 cells.
    for (k, cells) in (9..19).enumerate() {
        let x = 128 - cells / 2 + k % 3 - 1;
        let y = x + cells;
        let d = space.dist(x, y);
        assert!((0.2..=0.5).contains(&d), "d = {d}");
        let grid = geometric_grid(2.0 * h * h, d * d, 6).unwrap();
        let est = theta_plus(&space, &op, x, y, &grid).unwrap();
        let theta = |i: usize| 2.0 * PI * i as f64 / 256.0;
        let rho = (dv(theta(y)) - dv(theta(x))) / d;
        worst = worst.max(((est.value - rho) / rho).abs());
        pairs += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        pairs == 10 && worst <= 0.10 && secs <= 300.0,
        format!("worst relative error {worst:.4} over {pairs} pairs (limit 0.10), {secs:.1}s"),
    );
}

fn criterion_02_sphere_sandwich() {
    let start = Instant::now();
    let model = ModelManifold::sphere(1.0, vec![]).unwrap();
    let space = model.discretize(24).unwrap();
    let labels = space.labels().unwrap().to_vec();
    let op = build_witten(&space).unwrap();
    let h = op.mesh_h();
    let tol = 0.15;
    let mut lines = Vec::new();
    let mut ok = true;
    // Meridional pairs six rows apart (d = π/4), spread over columns.
    for (k, row) in (6..11).enumerate() {
        let col = 7 * k;
        let (x, y) = (row * 48 + col, (row + 6) * 48 + col);
        let d = space.dist(x, y);
        assert!((0.3..=0.8).contains(&d), "d = {d}");
        let grid = geometric_grid(2.0 * h * h, d * d, 6).unwrap();
        let est = theta_plus(&space, &op, x, y, &grid).unwrap();
        let b = sturm_bounds(&model, labels[x], labels[y]).unwrap();
        let inside = b.lower - tol <= est.value && est.value <= b.upper + tol;
        ok &= inside;
        lines.push(format!("({x},{y}) {:.3}∈[{:.3},{:.3}]", est.value, b.lower - tol, b.upper + tol));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(2, ok && secs <= 600.0, format!("{} in {secs:.1}s", lines.join(" ")));
}

fn criterion_03_theta_star_refinement() {
    let model = weighted_circle();
    let opts = ThetaStarOptions { t_points: 4, window_fraction: 0.5, ..Default::default() };
    let mut gaps = Vec::new();
    for res in [128, 256, 512] {
        let space = model.discretize(res).unwrap();
        let op = build_witten(&space).unwrap();
        let ts = theta_star(&space, &op, res / 2, &[0.15], &opts).unwrap();
        gaps.push((ts.value - 0.5).abs());
    }
    let ratios = [gaps[1] / gaps[0], gaps[2] / gaps[1]];
    let ok = ratios.iter().all(|r| (0.375..=0.625).contains(r));
    verdict(
        3,
        ok,
        format!("gaps {:.5} {:.5} {:.5}, ratios {:.3} {:.3} (need 0.5±25%)", gaps[0], gaps[1], gaps[2], ratios[0], ratios[1]),
    );
}

/// A vertex of the transport polytope: north-west corner rule on shuffled rows and columns.
fn random_vertex(rng: &mut ChaCha8Rng, mu: &[f64], nu: &[f64]) -> Vec<f64> {
    let n = mu.len();
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let (mut a, mut b) = (mu.to_vec(), nu.to_vec());
    let mut plan = vec![0.0; n * n];
    let (mut r, mut c) = (0, 0);
    while r < n && c < n {
        let (i, j) = (rows[r], cols[c]);
        let m = a[i].min(b[j]);
        plan[i * n + j] += m;
        a[i] -= m;
        b[j] -= m;
        if a[i] <= b[j] {
            r += 1;
        } else {
            c += 1;
        }
    }
    plan
}

fn criterion_04_transport_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_uniform: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(2..=6);
        let space = FiniteMMS::new(random_euclidean(&mut rng, n), vec![1.0; n]).unwrap();
        // Uniform marginals on two random k-subsets: the optimum is a bijection.
        let k = rng.gen_range(1..=n);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let src = idx[..k].to_vec();
        idx.shuffle(&mut rng);
        let dst = idx[..k].to_vec();
        let uniform_on = |s: &[usize]| {
            let mut p = vec![0.0; n];
            s.iter().for_each(|&i| p[i] = 1.0 / k as f64);
            ProbVector::normalized(p).unwrap()
        };
        let (w, _) = w2_exact(&space, &uniform_on(&src), &uniform_on(&dst)).unwrap();
        let brute = permutations(k)
            .iter()
            .map(|p| (0..k).map(|a| space.dist(src[a], dst[p[a]]).powi(2)).sum::<f64>() / k as f64)
            .fold(f64::INFINITY, f64::min);
        worst_uniform = worst_uniform.max((w * w - brute).abs());
    }
    let mut violations = 0;
    let mut rejected = 0;
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let space = FiniteMMS::new(random_euclidean(&mut rng, n), vec![1.0; n]).unwrap();
        let draw = |rng: &mut ChaCha8Rng| ProbVector::normalized((0..n).map(|_| rng.gen::<f64>() + 0.01).collect()).unwrap();
        let (mu, nu) = (draw(&mut rng), draw(&mut rng));
        let (_, plan) = w2_exact(&space, &mu, &nu).unwrap();
        let mut sampled = 0;
        while sampled < 10_000 {
            let weights: Vec<f64> = (0..3).map(|_| -rng.gen::<f64>().ln()).collect();
            let total: f64 = weights.iter().sum();
            let mut mix = vec![0.0; n * n];
            for w in &weights {
                let v = random_vertex(&mut rng, mu.as_slice(), nu.as_slice());
                mix.iter_mut().zip(v).for_each(|(m, x)| *m += w / total * x);
            }
            let marginal_err = (0..n)
                .map(|i| {
                    let row: f64 = (0..n).map(|j| mix[i * n + j]).sum();
                    let col: f64 = (0..n).map(|j| mix[j * n + i]).sum();
                    (row - mu[i]).abs().max((col - nu[i]).abs())
                })
                .fold(0.0, f64::max);
            if marginal_err > 1e-12 || mix.iter().any(|&x| x < 0.0) {
                rejected += 1;
                continue;
            }
            sampled += 1;
            let cost: f64 = (0..n * n).map(|k| mix[k] * space.dist(k / n, k % n).powi(2)).sum();
            if plan.cost > cost + 1e-12 {
                violations += 1;
            }
        }
    }
    verdict(
        4,
        worst_uniform <= 1e-12 && violations == 0,
        format!("uniform max |W²−brute| = {worst_uniform:.2e}; {violations} of 200000 random plans cheaper ({rejected} rejected)"),
    );
}

fn criterion_05_heat_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut mass, mut semigroup, mut duality) = (0.0f64, 0.0f64, 0.0f64);
    let mut monotone = true;
    for (name, model, res) in model_corpus() {
        let space = model.discretize(res).unwrap();
        let op = build_witten(&space).unwrap();
        let n = space.n();
        let smooth = ProbVector::normalized((0..n).map(|_| rng.gen::<f64>()).collect()).unwrap();
        for mu in [dirac(&space, n / 3).unwrap(), smooth] {
            let mut last = f64::INFINITY;
            for t in [0.0, 1e-3, 1e-2, 5e-2, 0.1, 0.5, 2.0] {
                let mt = heat_flow(&op, &mu, t).unwrap().density;
                mass = mass.max((mt.as_slice().iter().sum::<f64>() - 1.0).abs());
                let e = entropy(&space, &mt);
                if e > last + 1e-12 * last.abs().max(1.0) {
                    monotone = false;
                    eprintln!("{name}: entropy rose from {last} to {e} at t = {t}");
                }
                last = e;
            }
            let (s, t) = (0.01, 0.04);
            let direct = heat_flow(&op, &mu, s + t).unwrap().density;
            let stepped = heat_flow(&op, &heat_flow(&op, &mu, t).unwrap().density, s).unwrap().density;
            let gap = direct.as_slice().iter().zip(stepped.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            semigroup = semigroup.max(gap);
            let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mt = heat_flow(&op, &mu, 0.05).unwrap().density;
            let hf = op.heat_function(&f, 0.05).unwrap();
            let lhs: f64 = f.iter().zip(mt.as_slice()).map(|(a, b)| a * b).sum();
            let rhs: f64 = hf.iter().zip(mu.as_slice()).map(|(a, b)| a * b).sum();
            duality = duality.max((lhs - rhs).abs());
        }
    }
    verdict(
        5,
        mass <= 1e-12 && monotone && semigroup <= 1e-9 && duality <= 1e-10,
        format!("mass {mass:.1e} (≤1e-12), entropy monotone {monotone}, semigroup {semigroup:.1e} (≤1e-9), duality {duality:.1e} (≤1e-10)"),
    );
}

fn criterion_06_isometry_oracle() {
    let mut mismatches = Vec::new();
    let mut orders = Vec::new();
    for (name, space) in small_corpus() {
        let tol = default_tolerance(&space);
        let group = enumerate_isometries(&space, tol).unwrap();
        let mut found: Vec<Vec<usize>> = group.elements.iter().map(|g| g.perm.clone()).collect();
        found.sort();
        if found != brute_force_isometries(&space, tol) {
            mismatches.push(name);
        }
        orders.push(format!("{name}={}", group.order()));
    }
    let c6 = orders.iter().any(|o| o == "C6=12");
    verdict(6, mismatches.is_empty() && c6, format!("orders [{}], mismatches {mismatches:?}", orders.join(", ")));
}

fn criterion_07_pigeonhole_end_to_end() {
    let space = FiniteMMS::cycle(12, 1.0);
    let group = enumerate_isometries(&space, default_tolerance(&space)).unwrap();
    let a = space.diameter() / 4.0;
    let cover = covering_number(&space, a).unwrap();
    let report = injection_map(&space, &group, &cover.centers, a, None).unwrap();
    let bound = pigeonhole_bound(cover.count() as u64);
    let counted = BigUint::from(group.order()) <= bound;
    let detail = match &report.collision {
        Some(c) => format!(
            "#Iso={} N={} N!={bound}; injection refuted: elements {:?} and {:?} share F (discrepancy {})",
            group.order(),
            cover.count(),
            group.elements[c.first].perm,
            group.elements[c.second].perm,
            c.discrepancy
        ),
        None => format!("#Iso={} ≤ N!={bound}, F injective", group.order()),
    };
    verdict(7, report.injective && counted, detail);
}

fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::from(1u8);
    for k in 2..=n {
        acc *= BigUint::from(k);
    }
    acc
}

fn criterion_08_constants_pipeline() {
    let l41 = sector_constants(3, 1.0, 10.0).unwrap();
    let exact = l41.c1 == 8.0 && l41.c2 == 1.0 && l41.delta0 == PI / 2.0;
    let budget = GeometryBudget {
        n: 3,
        big_n: 3.0,
        i0: 10.0,
        lambda1: 1.0,
        lambda2: 1.0,
        lambda3: Some(1.0),
        v: 1.0,
        d: 1.0,
        e: None,
        w: 1.0,
        a: 1.0,
        b: 1.0,
    };
    let delta = angle_delta(&budget).unwrap().delta;
    let delta_err = (delta - 0.25f64.atan()).abs();
    // V(r) = ∫₀^r sinh²(s) ds = sinh(2r)/4 − r/2 for Λ₃ = 2, N = 3.
    let v = |r: f64| (2.0 * r).sinh() / 4.0 - r / 2.0;
    let (ratio, l) = packing_ratio(2.0, 0.5, 2.0, 3.0).unwrap();
    let closed = v(2.25) / v(0.25);
    let quad_err = ((ratio - closed) / closed).abs();
    let report = finiteness_bound(&budget).unwrap();
    let fact = report.l1 == factorial(report.l);
    verdict(
        8,
        exact && delta_err <= 1e-12 && quad_err <= 1e-9 && l == closed.ceil() as u64 && fact,
        format!(
            "sector constants exact {exact}; |δ−arctan(1/4)| = {delta_err:.1e}; packing rel err {quad_err:.1e} (L={l}); L={} and L1=L! {fact}",
            report.l
        ),
    );
}

fn criterion_09_beta_coefficients() {
    let mut flat = true;
    for n in [1.5, 2.0, 3.0, 10.0] {
        for t in [0.0, 0.25, 0.5, 1.0] {
            for d in [0.0, 0.5, 3.0, 100.0] {
                flat &= beta_distortion(0.0, n, t, d).unwrap() == 1.0;
            }
        }
    }
    let blowup = [3.2, 4.0, 3.0 * PI / 2.0, 10.0]
        .iter()
        .all(|&d| [0.0, 0.3, 0.5, 1.0].iter().all(|&t| beta_distortion(1.0, 2.0, t, d).unwrap() == f64::INFINITY));
    let hyper = beta_distortion(-1.0, 2.0, 0.5, 1.0).unwrap();
    let expected = 0.5f64.sinh() / (0.5 * 1f64.sinh());
    let err = (hyper - expected).abs();
    verdict(
        9,
        flat && blowup && err <= 1e-12,
        format!("K=0 grid all 1: {flat}; K=1,N=2,d>π all +∞: {blowup}; |β(−1,2,½,1) − ref| = {err:.1e}"),
    );
}

fn criterion_10_cd_direction() {
    let model = weighted_circle();
    let space = model.discretize(512).unwrap();
    let op = build_witten(&space).unwrap();
    let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
    let smoothed = |i: usize| heat_flow(&op, &dirac(&space, i).unwrap(), 0.01).unwrap().density;
    let mut lines = Vec::new();
    let mut any = false;
    // Pairs symmetric about θ = 0 (v″ = −0.5) and θ = π (v″ = +0.5), 80 cells apart.
    for center in [0usize, 256] {
        let (x, y) = ((center + 512 - 40) % 512, (center + 40) % 512);
        let (mu0, mu1) = (smoothed(x), smoothed(y));
        let lower = cd_convexity_check(&space, &model, &mu0, &mu1, -0.5, &ts).unwrap();
        let upper = cd_convexity_check(&space, &model, &mu0, &mu1, 0.6, &ts).unwrap();
        let interior_fail = upper.points.iter().any(|p| p.t > 0.0 && p.t < 1.0 && !p.pass);
        any |= lower.passed && interior_fail;
        lines.push(format!(
            "pair ({x},{y}): K=-0.5 passed={} (worst slack {:+.4}), K=0.6 interior failure={} (worst slack {:+.4})",
            lower.passed, lower.worst_slack, interior_fail, upper.worst_slack
        ));
    }
    verdict(10, any, lines.join("; "));
}

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn()); 10] = [
        ("criterion_01_weighted_circle_identity", criterion_01_weighted_circle_identity as fn()),
        ("criterion_02_sphere_sandwich", criterion_02_sphere_sandwich as fn()),
        ("criterion_03_theta_star_refinement", criterion_03_theta_star_refinement as fn()),
        ("criterion_04_transport_oracle", criterion_04_transport_oracle as fn()),
        ("criterion_05_heat_invariants", criterion_05_heat_invariants as fn()),
        ("criterion_06_isometry_oracle", criterion_06_isometry_oracle as fn()),
        ("criterion_07_pigeonhole_end_to_end", criterion_07_pigeonhole_end_to_end as fn()),
        ("criterion_08_constants_pipeline", criterion_08_constants_pipeline as fn()),
        ("criterion_09_beta_coefficients", criterion_09_beta_coefficients as fn()),
        ("criterion_10_cd_direction", criterion_10_cd_direction as fn()),
    ];
    std::panic::set_hook(Box::new(|info| eprintln!("  {info}")));
    let mut failed = Vec::new();
    for (name, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        if std::panic::catch_unwind(check).is_err() {
            failed.push(name);
        }
        eprintln!("  {name} took {:.1?}", start.elapsed());
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
