//! Measure-preserving isometry groups of finite spaces, and the covering
//! pigeonhole bound on their order.
//!
//! Permutations are found by backtracking: a point may only be sent to a
//! point with the same weight and the same sorted distance row, and every
//! new assignment must preserve distances to all points assigned before it.
//! Everything is compared within an explicit tolerance.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::mms::FiniteMMS;

/// Default node budget for [`enumerate_isometries`].
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

/// Default tolerance: `1e−9 · max(dist)`.
pub fn default_tolerance(space: &FiniteMMS) -> f64 {
    1e-9 * space.diameter()
}

/// A distance- and weight-preserving permutation, stored as `perm[i] = φ(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IsometryPermutation {
    pub perm: Vec<usize>,
}

impl IsometryPermutation {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { perm: other.perm.iter().map(|&i| self.perm[i]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        Self { perm: inv }
    }

    /// Checks both defining conditions within `tol`.
    pub fn preserves(&self, space: &FiniteMMS, tol: f64) -> bool {
        let n = space.n();
        if self.perm.len() != n {
            return false;
        }
        let wmax = space.weight().iter().copied().fold(0.0, f64::max);
        (0..n).all(|i| {
            (space.weight()[self.perm[i]] - space.weight()[i]).abs() <= tol * wmax
                && (0..n).all(|j| (space.dist(self.perm[i], self.perm[j]) - space.dist(i, j)).abs() <= tol)
        })
    }
}

/// The enumerated group with a generating subset.
#[derive(Clone, Debug, Serialize)]
pub struct IsometryGroup {
    /// All elements; the identity comes first.
    pub elements: Vec<IsometryPermutation>,
    pub generators: Vec<IsometryPermutation>,
    pub tol: f64,
    pub nodes_explored: u64,
}

impl IsometryGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Membership test.
    pub fn contains(&self, p: &IsometryPermutation) -> bool {
        self.elements.iter().any(|e| e == p)
    }
}

/// Enumerates all measure-preserving isometries with the default node budget.
pub fn enumerate_isometries(space: &FiniteMMS, tol: f64) -> Result<IsometryGroup> {
    enumerate_isometries_with_budget(space, tol, DEFAULT_NODE_BUDGET)
}

/// Checks that `tol` separates the distinct distance values unambiguously:
/// no gap between consecutive distinct values lies in `(tol, 2·tol]`, and no
/// run of values chained within `tol` spans more than `2·tol`.
pub fn check_tolerance(space: &FiniteMMS, tol: f64) -> Result<()> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return precondition("tolerance must be nonnegative and finite");
    }
    let mut values: Vec<f64> = space.dist_matrix().to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut start = values.first().copied().unwrap_or(0.0);
    for w in values.windows(2) {
        let gap = w[1] - w[0];
        if gap > tol && gap <= 2.0 * tol {
            return precondition(format!(
                "tolerance {tol:e} is ambiguous: distances {} and {} differ by {gap:e}",
                w[0], w[1]
            ));
        }
        if gap > tol {
            start = w[1];
        } else if w[1] - start > 2.0 * tol {
            return precondition(format!(
                "tolerance {tol:e} chains distances from {start} to {} into one class",
                w[1]
            ));
        }
    }
    Ok(())
}

/// Enumerates all measure-preserving isometries, exploring at most `budget`
/// search nodes. On overflow the error carries the isometries found so far.
pub fn enumerate_isometries_with_budget(space: &FiniteMMS, tol: f64, budget: u64) -> Result<IsometryGroup> {
    check_tolerance(space, tol)?;
    let n = space.n();
    let w = space.weight();
    let wmax = w.iter().copied().fold(0.0, f64::max);
    let sorted_rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = space.dist_row(i).to_vec();
            r.sort_by(f64::total_cmp);
            r
        })
        .collect();
    // compatible[i] = points i may be mapped to
    let compatible: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| {
                    (w[i] - w[j]).abs() <= tol * wmax
                        && sorted_rows[i].iter().zip(&sorted_rows[j]).all(|(a, b)| (a - b).abs() <= tol)
                })
                .collect()
        })
        .collect();

    let mut found = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut explored = 0u64;
    let mut search = Search { space, tol, compatible: &compatible, budget, explored: &mut explored };
    let complete = search.extend(0, &mut perm, &mut used, &mut found);
    if !complete {
        return Err(Error::BudgetExceeded { explored, partial: found.into_iter().map(|p: IsometryPermutation| p.perm).collect() });
    }
    if n == 0 {
        found.push(IsometryPermutation::identity(0));
    }
    found.sort_by(|a, b| a.perm.cmp(&b.perm));
    let generators = verify_group(&found)?;
    Ok(IsometryGroup { elements: found, generators, tol, nodes_explored: explored })
}

struct Search<'a> {
    space: &'a FiniteMMS,
    tol: f64,
    compatible: &'a [Vec<usize>],
    budget: u64,
    explored: &'a mut u64,
}

impl Search<'_> {
    /// Returns false once the budget is exhausted.
    fn extend(&mut self, k: usize, perm: &mut [usize], used: &mut [bool], out: &mut Vec<IsometryPermutation>) -> bool {
        let n = perm.len();
        if k == n {
            out.push(IsometryPermutation { perm: perm.to_vec() });
            return true;
        }
        for &c in &self.compatible[k] {
            if used[c] {
                continue;
            }
            *self.explored += 1;
            if *self.explored > self.budget {
                return false;
            }
            let row_k = self.space.dist_row(k);
            let row_c = self.space.dist_row(c);
            if (0..k).all(|i| (row_c[perm[i]] - row_k[i]).abs() <= self.tol) {
                perm[k] = c;
                used[c] = true;
                let ok = self.extend(k + 1, perm, used, out);
                used[c] = false;
                perm[k] = usize::MAX;
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

/// Confirms the element list is a group and returns a greedy generating set.
fn verify_group(elements: &[IsometryPermutation]) -> Result<Vec<IsometryPermutation>> {
    let set: HashSet<&IsometryPermutation> = elements.iter().collect();
    let n = elements.first().map_or(0, |e| e.perm.len());
    let id = IsometryPermutation::identity(n);
    if !set.contains(&id) {
        return Err(Error::Internal("identity missing from the isometry list".into()));
    }
    let mut generators: Vec<IsometryPermutation> = Vec::new();
    let mut span: HashSet<IsometryPermutation> = HashSet::from([id]);
    for e in elements {
        if span.contains(e) {
            continue;
        }
        generators.push(e.clone());
        // closure of the span under right multiplication by generators
        let mut queue: VecDeque<IsometryPermutation> = span.iter().cloned().collect();
        while let Some(g) = queue.pop_front() {
            for s in &generators {
                let h = g.compose(s);
                if !span.contains(&h) {
                    if !set.contains(&h) {
                        return Err(Error::Internal(
                            "isometry list is not closed under composition; tolerance too loose".into(),
                        ));
                    }
                    span.insert(h.clone());
                    queue.push_back(h);
                }
            }
        }
    }
    if span.len() != set.len() {
        return Err(Error::Internal("generated group differs from the enumerated list".into()));
    }
    for e in elements {
        if !set.contains(&e.inverse()) {
            return Err(Error::Internal("isometry list is not closed under inverses".into()));
        }
    }
    Ok(generators)
}

/// Pointwise and maximal displacement of an isometry.
#[derive(Clone, Debug, Serialize)]
pub struct DisplacementProfile {
    pub d_phi: Vec<f64>,
    pub delta_phi: f64,
}

pub fn displacement(space: &FiniteMMS, phi: &IsometryPermutation) -> Result<DisplacementProfile> {
    if phi.perm.len() != space.n() {
        return precondition("permutation length does not match the space");
    }
    let d_phi: Vec<f64> = phi.perm.iter().enumerate().map(|(i, &p)| space.dist(i, p)).collect();
    let delta_phi = d_phi.iter().copied().fold(0.0, f64::max);
    Ok(DisplacementProfile { d_phi, delta_phi })
}

/// A greedy `a`-cover.
#[derive(Clone, Debug, Serialize)]
pub struct Cover {
    pub a: f64,
    /// Centers in construction order.
    pub centers: Vec<usize>,
}

impl Cover {
    pub fn count(&self) -> usize {
        self.centers.len()
    }
}

/// Greedy farthest-point `a`-cover with closed balls, starting from point 0;
/// ties go to the smallest index. Its size bounds the covering number from above.
pub fn covering_number(space: &FiniteMMS, a: f64) -> Result<Cover> {
    if !(a > 0.0) {
        return precondition("cover radius must be positive");
    }
    let n = space.n();
    let mut centers = Vec::new();
    if n == 0 {
        return Ok(Cover { a, centers });
    }
    let mut gap = vec![f64::INFINITY; n];
    let mut next = 0;
    loop {
        centers.push(next);
        for (i, g) in gap.iter_mut().enumerate() {
            *g = g.min(space.dist(next, i));
        }
        let (far, &d) = gap
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |best, cur| if *cur.1 > *best.1 { cur } else { best });
        if d <= a {
            break;
        }
        next = far;
    }
    Ok(Cover { a, centers })
}

/// `N!` as an exact integer.
pub fn pigeonhole_bound(n: u64) -> BigUint {
    (1..=n).fold(BigUint::from(1u32), |acc, k| acc * k)
}

/// Two group elements sent to the same center permutation.
#[derive(Clone, Debug, Serialize)]
pub struct Collision {
    pub first: usize,
    pub second: usize,
    /// `max_x d(φ(x), ψ(x))` over all points.
    pub discrepancy: f64,
}

/// The map `φ ↦ F(φ)` with an injectivity certificate.
#[derive(Clone, Debug, Serialize)]
pub struct InjectionReport {
    /// `images[g][i]` = index (into `centers`) of the first center within `a` of `φ_g(x_i)`.
    pub images: Vec<Vec<usize>>,
    pub injective: bool,
    pub collision: Option<Collision>,
}

/// Sends each isometry `φ` to `F(φ): i ↦` smallest `j` with `d(φ(x_i), x_j) ≤ a`.
///
/// `lambda`, when given, is a rigidity scale and must satisfy `4a ≤ λ`.
pub fn injection_map(
    space: &FiniteMMS,
    group: &IsometryGroup,
    centers: &[usize],
    a: f64,
    lambda: Option<f64>,
) -> Result<InjectionReport> {
    let n = space.n();
    if let Some(&c) = centers.iter().find(|&&c| c >= n) {
        return Err(Error::IndexOutOfRange { index: c, n });
    }
    if let Some(l) = lambda {
        if 4.0 * a > l {
            return precondition(format!("4a = {} exceeds the rigidity scale {l}", 4.0 * a));
        }
    }
    for p in 0..n {
        let nearest = centers.iter().map(|&c| space.dist(p, c)).fold(f64::INFINITY, f64::min);
        if nearest > a {
            return Err(Error::NotACover { point: p, distance: nearest, a });
        }
    }
    let images: Vec<Vec<usize>> = group
        .elements
        .iter()
        .map(|g| {
            centers
                .iter()
                .map(|&c| {
                    let y = g.perm[c];
                    centers.iter().position(|&cj| space.dist(y, cj) <= a).expect("cover checked above")
                })
                .collect()
        })
        .collect();
    let mut collision = None;
    'outer: for i in 0..images.len() {
        for j in i + 1..images.len() {
            if images[i] == images[j] {
                let (gi, gj) = (&group.elements[i], &group.elements[j]);
                let discrepancy = (0..n).map(|x| space.dist(gi.perm[x], gj.perm[x])).fold(0.0, f64::max);
                collision = Some(Collision { first: i, second: j, discrepancy });
                break 'outer;
            }
        }
    }
    Ok(InjectionReport { injective: collision.is_none(), images, collision })
}

/// Largest `λ` such that no non-identity element moves every point by at most `λ`:
/// one ulp below the smallest `δ_φ`, or `+∞` for the trivial group.
pub fn rigidity_scan(space: &FiniteMMS, group: &IsometryGroup) -> Result<f64> {
    let mut min_delta = f64::INFINITY;
    for g in group.elements.iter().filter(|g| !g.is_identity()) {
        min_delta = min_delta.min(displacement(space, g)?.delta_phi);
    }
    Ok(if min_delta.is_infinite() { min_delta } else { min_delta.next_down() })
}
