//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use synthric::isometry::IsometryPermutation;
use synthric::mms::{FiniteMMS, FourierSeries, ModelManifold};

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            let j = if k % 2 == 0 { i } else { 0 };
            a.swap(j, k - 1);
        }
    }
    let mut out = Vec::new();
    heap(n, &mut (0..n).collect(), &mut out);
    out
}

/// Every permutation preserving distances and weights within `tol`, sorted.
pub fn brute_force_isometries(space: &FiniteMMS, tol: f64) -> Vec<Vec<usize>> {
    let mut found: Vec<Vec<usize>> = permutations(space.n())
        .into_iter()
        .filter(|p| IsometryPermutation { perm: p.clone() }.preserves(space, tol))
        .collect();
    found.sort();
    found
}

/// Euclidean distances between `n` random points of the unit cube in R³.
pub fn random_euclidean(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let pts: Vec<[f64; 3]> = (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = (0..3).map(|k| (pts[i][k] - pts[j][k]).powi(2)).sum::<f64>().sqrt();
        }
    }
    dist
}

pub fn weighted_circle() -> ModelManifold {
    ModelManifold::circle(1.0, FourierSeries { constant: 0.0, cos: vec![(1, 0.5)], sin: vec![] }).unwrap()
}

pub fn uniform_circle() -> ModelManifold {
    ModelManifold::circle(1.0, FourierSeries::default()).unwrap()
}

/// The model corpus: `(name, model, resolution)`.
pub fn model_corpus() -> Vec<(&'static str, ModelManifold, usize)> {
    let fs = |c: f64, s: f64| FourierSeries { constant: 0.0, cos: vec![(1, c)], sin: vec![(2, s)] };
    vec![
        ("uniform circle", uniform_circle(), 128),
        ("weighted circle", weighted_circle(), 256),
        ("unit sphere", ModelManifold::sphere(1.0, vec![]).unwrap(), 12),
        ("weighted sphere r=2", ModelManifold::sphere(2.0, vec![0.0, 0.3, -0.1]).unwrap(), 12),
        ("flat torus", ModelManifold::torus(1.0, 1.5, FourierSeries::default(), FourierSeries::default()).unwrap(), 12),
        ("weighted torus", ModelManifold::torus(1.0, 1.0, fs(0.4, 0.1), fs(-0.2, 0.3)).unwrap(), 12),
    ]
}

/// Finite spaces with at most eight points.
pub fn small_corpus() -> Vec<(&'static str, FiniteMMS)> {
    let mut perturbed = FiniteMMS::cycle(6, 1.0);
    let mut w = perturbed.weight().to_vec();
    w[0] *= 1.1;
    perturbed = FiniteMMS::new(perturbed.dist_matrix().to_vec(), w).unwrap();
    let path = {
        let n: usize = 5;
        let dist = (0..n * n).map(|k| (k / n).abs_diff(k % n) as f64).collect();
        FiniteMMS::new(dist, vec![1.0; n]).unwrap()
    };
    let simplex = {
        let n = 4;
        let dist = (0..n * n).map(|k| if k / n == k % n { 0.0 } else { 1.0 }).collect();
        FiniteMMS::new(dist, vec![0.25; n]).unwrap()
    };
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
    let random = FiniteMMS::new(random_euclidean(&mut rng, 7), vec![1.0; 7]).unwrap();
    vec![
        ("single point", FiniteMMS::new(vec![0.0], vec![1.0]).unwrap()),
        ("C6", FiniteMMS::cycle(6, 1.0)),
        ("weight-perturbed C6", perturbed),
        ("flat torus 2x3", FiniteMMS::flat_torus_grid(2, 3, 1.0, 1.5)),
        ("flat torus 2x2 square", FiniteMMS::flat_torus_grid(2, 2, 1.0, 1.0)),
        ("path P5", path),
        ("simplex K4", simplex),
        ("C8", FiniteMMS::cycle(8, 0.5)),
        ("random 7 points", random),
    ]
}
