//! Quadratic-cost optimal transport between probability vectors on a
//! [`FiniteMMS`]: an exact network-simplex solver, a debiased log-domain
//! Sinkhorn solver, and plan-based displacement interpolation.

mod simplex;

use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::mms::{FiniteMMS, ModelManifold, ProbVector};
use crate::numeric::neumaier_sum;

/// Marginal and cost tolerance used by [`check_coupling`].
pub const COUPLING_TOL: f64 = 1e-9;

/// Artificial mass the exact solver may leave unrouted (marginal roundoff).
const ARTIFICIAL_TOL: f64 = 1e-12;

/// A transport plan with its marginals and quadratic cost `Σ d² π`.
#[derive(Clone, Debug)]
pub struct Coupling {
    /// Row-major `n × n` plan.
    pub pi: Vec<f64>,
    pub mu: ProbVector,
    pub nu: ProbVector,
    pub cost: f64,
}

impl Coupling {
    pub fn n(&self) -> usize {
        self.mu.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pi[i * self.n() + j]
    }

    /// Nonzero entries `(i, j, mass)` in row-major order.
    pub fn atoms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        self.pi
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(move |(idx, &p)| (idx / n, idx % n, p))
    }

    /// The diagonal coupling of `mu` with itself.
    pub fn diagonal(mu: &ProbVector) -> Self {
        let n = mu.len();
        let mut pi = vec![0.0; n * n];
        for i in 0..n {
            pi[i * n + i] = mu[i];
        }
        Self { pi, mu: mu.clone(), nu: mu.clone(), cost: 0.0 }
    }
}

/// Exact 2-Wasserstein distance and an optimal plan.
///
/// Marginals are renormalized by their compensated sums before solving so the
/// flow problem is balanced to roundoff; zero-mass points are dropped from
/// the flow network.
pub fn w2_exact(space: &FiniteMMS, mu: &ProbVector, nu: &ProbVector) -> Result<(f64, Coupling)> {
    check_marginals(space, mu, nu)?;
    let n = space.n();
    let rows = mu.support();
    let cols = nu.support();
    let supply = renormalized(mu, &rows);
    let demand = renormalized(nu, &cols);
    let mut cost = Vec::with_capacity(rows.len() * cols.len());
    for &i in &rows {
        let drow = space.dist_row(i);
        cost.extend(cols.iter().map(|&j| drow[j] * drow[j]));
    }
    let sol = simplex::solve(&cost, &supply, &demand)?;
    if sol.artificial_flow > ARTIFICIAL_TOL {
        return Err(Error::Internal(format!(
            "transport solver left {:e} mass on artificial arcs",
            sol.artificial_flow
        )));
    }
    let mut pi = vec![0.0; n * n];
    let k = cols.len();
    let mut terms = Vec::new();
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            let f = sol.flow[r * k + c];
            if f > 0.0 {
                pi[i * n + j] = f;
                terms.push(f * cost[r * k + c]);
            }
        }
    }
    let total = neumaier_sum(terms).max(0.0);
    let plan = Coupling { pi, mu: mu.clone(), nu: nu.clone(), cost: total };
    Ok((total.sqrt(), plan))
}

/// Result of the entropic solver.
#[derive(Clone, Debug)]
pub struct EntropicResult {
    /// `sqrt` of the debiased Sinkhorn divergence (clamped at 0).
    pub w_eps: f64,
    /// Debiased divergence `OT_ε(μ,ν) − ½OT_ε(μ,μ) − ½OT_ε(ν,ν)`.
    pub divergence: f64,
    /// Entropic plan between `mu` and `nu`; `cost` is its transport cost `Σ d² π`.
    pub plan: Coupling,
    pub converged: bool,
    /// Largest iteration count among the three Sinkhorn solves.
    pub iterations: usize,
}

/// Smallest regularization accepted for a space with squared diameter `max_c`.
pub fn epsilon_floor(max_c: f64) -> f64 {
    max_c * 2f64.powi(-40)
}

/// Debiased entropic transport with a log-domain Sinkhorn iteration.
pub fn w2_entropic(
    space: &FiniteMMS,
    mu: &ProbVector,
    nu: &ProbVector,
    epsilon: f64,
    max_iter: usize,
) -> Result<EntropicResult> {
    check_marginals(space, mu, nu)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return precondition("epsilon must be positive and finite");
    }
    let d = space.diameter();
    let floor = epsilon_floor(d * d);
    if epsilon < floor {
        return Err(Error::EpsilonTooSmall { epsilon, floor });
    }
    let cross = sinkhorn(space, mu, nu, epsilon, max_iter);
    let self_mu = sinkhorn(space, mu, mu, epsilon, max_iter);
    let self_nu = sinkhorn(space, nu, nu, epsilon, max_iter);
    let divergence = cross.value - 0.5 * (self_mu.value + self_nu.value);
    let n = space.n();
    let mut pi = vec![0.0; n * n];
    let mut terms = Vec::new();
    for (r, &i) in cross.rows.iter().enumerate() {
        for (c, &j) in cross.cols.iter().enumerate() {
            let p = cross.plan[r * cross.cols.len() + c];
            pi[i * n + j] = p;
            terms.push(p * space.dist(i, j).powi(2));
        }
    }
    let plan = Coupling { pi, mu: mu.clone(), nu: nu.clone(), cost: neumaier_sum(terms) };
    Ok(EntropicResult {
        w_eps: divergence.max(0.0).sqrt(),
        divergence,
        plan,
        converged: cross.converged && self_mu.converged && self_nu.converged,
        iterations: cross.iterations.max(self_mu.iterations).max(self_nu.iterations),
    })
}

struct SinkhornOutput {
    value: f64,
    plan: Vec<f64>,
    rows: Vec<usize>,
    cols: Vec<usize>,
    converged: bool,
    iterations: usize,
}

fn sinkhorn(space: &FiniteMMS, mu: &ProbVector, nu: &ProbVector, eps: f64, max_iter: usize) -> SinkhornOutput {
    let rows = mu.support();
    let cols = nu.support();
    let a = renormalized(mu, &rows);
    let b = renormalized(nu, &cols);
    let (m, k) = (rows.len(), cols.len());
    let cost: Vec<f64> = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| space.dist(i, j).powi(2)))
        .collect();
    let log_a: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; k];
    let mut buf = vec![0.0; m.max(k)];
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..max_iter.max(1) {
        iterations = it + 1;
        for i in 0..m {
            for j in 0..k {
                buf[j] = (g[j] - cost[i * k + j]) / eps + log_b[j];
            }
            f[i] = -eps * log_sum_exp(&buf[..k]);
        }
        for j in 0..k {
            for i in 0..m {
                buf[i] = (f[i] - cost[i * k + j]) / eps + log_a[i];
            }
            g[j] = -eps * log_sum_exp(&buf[..m]);
        }
        // Columns are exact after the g-update; measure the row error.
        let mut err = 0.0;
        for i in 0..m {
            let row: f64 = (0..k)
                .map(|j| ((f[i] + g[j] - cost[i * k + j]) / eps + log_a[i] + log_b[j]).exp())
                .sum();
            err += (row - a[i]).abs();
        }
        if err <= 1e-8 {
            converged = true;
            break;
        }
    }
    let plan: Vec<f64> = (0..m * k)
        .map(|idx| {
            let (i, j) = (idx / k, idx % k);
            ((f[i] + g[j] - cost[idx]) / eps + log_a[i] + log_b[j]).exp()
        })
        .collect();
    let value = neumaier_sum(a.iter().zip(&f).map(|(x, y)| x * y)) + neumaier_sum(b.iter().zip(&g).map(|(x, y)| x * y));
    SinkhornOutput { value, plan, rows, cols, converged, iterations }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let mx = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + xs.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}

/// Places every plan atom on the discrete point nearest to its geodesic
/// position at time `t`.
///
/// With a model, the space must carry model coordinates (as produced by
/// [`ModelManifold::discretize`]). Without one, atoms sit at their source
/// for `t < 0.5` and at their target otherwise.
pub fn displacement_interpolate(
    space: &FiniteMMS,
    plan: &Coupling,
    t: f64,
    model: Option<&ModelManifold>,
) -> Result<ProbVector> {
    if !(0.0..=1.0).contains(&t) {
        return precondition(format!("interpolation time {t} outside [0, 1]"));
    }
    let n = space.n();
    if plan.n() != n {
        return precondition("plan and space sizes differ");
    }
    if t == 0.0 {
        return Ok(plan.mu.clone());
    }
    if t == 1.0 {
        return Ok(plan.nu.clone());
    }
    let mut out = vec![0.0; n];
    match model {
        None => {
            for (i, j, p) in plan.atoms() {
                out[if t < 0.5 { i } else { j }] += p;
            }
        }
        Some(model) => {
            let labels = space
                .labels()
                .ok_or_else(|| Error::Precondition("space has no model coordinates".into()))?;
            let tie = TIE_RELATIVE * space.max_edge_length().max(f64::MIN_POSITIVE);
            for (i, j, p) in plan.atoms() {
                let target = if i == j {
                    i
                } else {
                    let q = model.geodesic_point(labels[i], labels[j], t)?;
                    nearest(model, labels, q, labels[i], tie)
                };
                out[target] += p;
            }
        }
    }
    ProbVector::normalized(out)
}

/// Distances closer than this fraction of the mesh size count as ties.
const TIE_RELATIVE: f64 = 1e-9;

/// Nearest sample point to `q`. A geodesic point halfway between two
/// samples is a tie decided by roundoff; such ties go to the candidate
/// nearer the source, then to the lowest index, so that neighbouring atoms
/// moving in parallel round the same way instead of colliding.
fn nearest(model: &ModelManifold, labels: &[[f64; 2]], q: [f64; 2], source: [f64; 2], tie: f64) -> usize {
    let dists: Vec<f64> = labels.iter().map(|&p| model.distance(p, q)).collect();
    let best = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let mut choice = (f64::INFINITY, 0);
    for (i, &d) in dists.iter().enumerate() {
        if d <= best + tie {
            let from_source = model.distance(source, labels[i]);
            if from_source < choice.0 - tie {
                choice = (from_source, i);
            }
        }
    }
    choice.1
}

/// Problems found by [`check_coupling`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingViolation {
    NegativeEntry { i: usize, j: usize, value: f64 },
    RowMarginal { i: usize, sum: f64, expected: f64 },
    ColumnMarginal { j: usize, sum: f64, expected: f64 },
    Cost { stored: f64, recomputed: f64 },
    Shape { expected: usize, found: usize },
}

/// Checks a plan's marginals and its stored cost against `space`'s distances.
pub fn check_coupling(space: &FiniteMMS, plan: &Coupling) -> Vec<CouplingViolation> {
    let n = space.n();
    let mut out = Vec::new();
    if plan.pi.len() != n * n || plan.mu.len() != n || plan.nu.len() != n {
        out.push(CouplingViolation::Shape { expected: n * n, found: plan.pi.len() });
        return out;
    }
    for i in 0..n {
        for j in 0..n {
            let p = plan.get(i, j);
            if p < 0.0 {
                out.push(CouplingViolation::NegativeEntry { i, j, value: p });
            }
        }
    }
    for i in 0..n {
        let sum = neumaier_sum((0..n).map(|j| plan.get(i, j)));
        if (sum - plan.mu[i]).abs() > COUPLING_TOL {
            out.push(CouplingViolation::RowMarginal { i, sum, expected: plan.mu[i] });
        }
    }
    for j in 0..n {
        let sum = neumaier_sum((0..n).map(|i| plan.get(i, j)));
        if (sum - plan.nu[j]).abs() > COUPLING_TOL {
            out.push(CouplingViolation::ColumnMarginal { j, sum, expected: plan.nu[j] });
        }
    }
    let recomputed = neumaier_sum(plan.atoms().map(|(i, j, p)| p * space.dist(i, j).powi(2)));
    if (recomputed - plan.cost).abs() > COUPLING_TOL {
        out.push(CouplingViolation::Cost { stored: plan.cost, recomputed });
    }
    out
}

fn check_marginals(space: &FiniteMMS, mu: &ProbVector, nu: &ProbVector) -> Result<()> {
    if mu.len() != space.n() || nu.len() != space.n() {
        return precondition(format!(
            "marginal lengths {} and {} do not match a space with {} points",
            mu.len(),
            nu.len(),
            space.n()
        ));
    }
    Ok(())
}

fn renormalized(p: &ProbVector, idx: &[usize]) -> Vec<f64> {
    let total = neumaier_sum(idx.iter().map(|&i| p[i]));
    idx.iter().map(|&i| p[i] / total).collect()
}
