//! The discrete Witten Laplacian, its heat semigroup on functions and on
//! measures, and the relative entropy.
//!
//! Off-diagonal entries are `L_ij = sqrt(w_j / w_i) / h_ij²` on mesh edges.
//! This keeps `w_i L_ij` symmetric, makes every row sum vanish, reproduces
//! the `(1, −2, 1)/h²` stencil on a uniform circle, and to first order in
//! `h` yields the drift `−⟨∇v, ∇·⟩` when `w = e^{−v}·cell`.
//!
//! Because `D^{1/2} L D^{−1/2}` (with `D = diag(w)`) is symmetric, small and
//! medium operators are propagated exactly through a cached symmetric
//! eigendecomposition; larger ones fall back to Crank–Nicolson steps in
//! density variables.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::mms::{FiniteMMS, ProbVector};
use crate::numeric::neumaier_sum;

/// Largest operator size propagated through the eigendecomposition.
pub const SPECTRAL_MAX_N: usize = 2000;

/// Entries below this fraction of the largest entry are roundoff and are zeroed.
const ROUNDOFF_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Discrete Witten Laplacian of a [`FiniteMMS`] with mesh edges.
pub struct WittenOperator {
    n: usize,
    mass: Vec<f64>,
    mesh_h: f64,
    /// Off-diagonal entries per row, `(j, L_ij)`.
    rows: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    spectral: OnceLock<Spectral>,
}

struct Spectral {
    /// Orthonormal eigenvectors of `D^{1/2} L D^{-1/2}` as columns.
    q: DMatrix<f64>,
    lambda: Vec<f64>,
    sqrt_w: Vec<f64>,
}

impl std::fmt::Debug for WittenOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WittenOperator").field("n", &self.n).field("mesh_h", &self.mesh_h).finish()
    }
}

/// Builds the Witten Laplacian from the mesh edges of `space`.
pub fn build_witten(space: &FiniteMMS) -> Result<WittenOperator> {
    if space.adjacency().is_empty() {
        return Err(Error::MissingAdjacency);
    }
    let n = space.n();
    let w = space.weight();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut seen = std::collections::BTreeSet::new();
    for e in space.adjacency() {
        if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
            continue;
        }
        if !(e.length > 0.0) {
            return precondition(format!("edge ({}, {}) has nonpositive length", e.i, e.j));
        }
        let h2 = e.length * e.length;
        rows[e.i].push((e.j, (w[e.j] / w[e.i]).sqrt() / h2));
        rows[e.j].push((e.i, (w[e.i] / w[e.j]).sqrt() / h2));
    }
    for r in &mut rows {
        r.sort_by_key(|&(j, _)| j);
    }
    let diag = rows.iter().map(|r| -neumaier_sum(r.iter().map(|&(_, c)| c))).collect();
    Ok(WittenOperator {
        n,
        mass: w.to_vec(),
        mesh_h: space.max_edge_length(),
        rows,
        diag,
        spectral: OnceLock::new(),
    })
}

impl WittenOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The measure the operator is self-adjoint against.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Largest mesh edge length.
    pub fn mesh_h(&self) -> f64 {
        self.mesh_h
    }

    /// Entry `L[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        self.rows[i].iter().find(|&&(k, _)| k == j).map_or(0.0, |&(_, c)| c)
    }

    /// Dense copy of `L`, row-major.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            out[i * n + i] = self.diag[i];
            for &(j, c) in &self.rows[i] {
                out[i * n + j] = c;
            }
        }
        out
    }

    /// `L f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.diag[i] * f[i] + self.rows[i].iter().map(|&(j, c)| c * f[j]).sum::<f64>())
            .collect()
    }

    fn spectral(&self) -> &Spectral {
        self.spectral.get_or_init(|| {
            let n = self.n;
            let sqrt_w: Vec<f64> = self.mass.iter().map(|w| w.sqrt()).collect();
            let mut s = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                s[(i, i)] = self.diag[i];
                for &(j, c) in &self.rows[i] {
                    // sqrt(w_i) L_ij / sqrt(w_j), symmetrized against roundoff
                    let v = sqrt_w[i] * c / sqrt_w[j];
                    s[(i, j)] += 0.5 * v;
                    s[(j, i)] += 0.5 * v;
                }
            }
            let eig = SymmetricEigen::new(s);
            Spectral { q: eig.eigenvectors, lambda: eig.eigenvalues.iter().copied().collect(), sqrt_w }
        })
    }

    fn uses_spectral(&self) -> bool {
        self.n <= SPECTRAL_MAX_N
    }

    /// `H_t f = e^{tL} f` on functions.
    pub fn heat_function(&self, f: &[f64], t: f64) -> Result<Vec<f64>> {
        check_time(t)?;
        if f.len() != self.n {
            return precondition("function length does not match the operator");
        }
        if t == 0.0 {
            return Ok(f.to_vec());
        }
        if self.uses_spectral() {
            let sp = self.spectral();
            let g = DVector::from_iterator(self.n, f.iter().zip(&sp.sqrt_w).map(|(x, s)| x * s));
            let out = self.spectral_apply(sp, &g, t);
            Ok(out.iter().zip(&sp.sqrt_w).map(|(x, s)| x / s).collect())
        } else {
            Ok(self.crank_nicolson(f, t))
        }
    }

    fn spectral_apply(&self, sp: &Spectral, g: &DVector<f64>, t: f64) -> DVector<f64> {
        let mut c = sp.q.tr_mul(g);
        for (ck, &l) in c.iter_mut().zip(&sp.lambda) {
            *ck *= (t * l.min(0.0)).exp();
        }
        &sp.q * c
    }

    /// Crank–Nicolson for `ρ' = Lρ`, solving `(D − dt/2·DL)ρ⁺ = (D + dt/2·DL)ρ` by CG.
    fn crank_nicolson(&self, rho0: &[f64], t: f64) -> Vec<f64> {
        let max_diag = self.diag.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        let dt_max = (0.25 * self.mesh_h * self.mesh_h).min(1.0 / max_diag);
        let steps = (t / dt_max).ceil().max(1.0) as usize;
        self.crank_nicolson_steps(rho0, t, steps)
    }

    fn crank_nicolson_steps(&self, rho0: &[f64], t: f64, steps: usize) -> Vec<f64> {
        let dt = t / steps as f64;
        let w = &self.mass;
        let mut rho = rho0.to_vec();
        // A x = D x − dt/2 · D L x
        let apply_a = |x: &[f64]| -> Vec<f64> {
            let lx = self.apply(x);
            (0..self.n).map(|i| w[i] * (x[i] - 0.5 * dt * lx[i])).collect()
        };
        for _ in 0..steps {
            let lr = self.apply(&rho);
            let b: Vec<f64> = (0..self.n).map(|i| w[i] * (rho[i] + 0.5 * dt * lr[i])).collect();
            rho = conjugate_gradient(&apply_a, &b, &rho, w);
        }
        rho
    }

    /// Measure-side flow `μ ↦ μ e^{tL}` without clamping.
    fn flow_measure_raw(&self, mu: &[f64], t: f64) -> Vec<f64> {
        if self.uses_spectral() {
            let sp = self.spectral();
            let g = DVector::from_iterator(self.n, mu.iter().zip(&sp.sqrt_w).map(|(x, s)| x / s));
            let out = self.spectral_apply(sp, &g, t);
            out.iter().zip(&sp.sqrt_w).map(|(x, s)| x * s).collect()
        } else {
            let rho: Vec<f64> = mu.iter().zip(&self.mass).map(|(m, w)| m / w).collect();
            let rho_t = self.crank_nicolson(&rho, t);
            rho_t.iter().zip(&self.mass).map(|(r, w)| r * w).collect()
        }
    }
}

fn conjugate_gradient(apply: &impl Fn(&[f64]) -> Vec<f64>, b: &[f64], x0: &[f64], diag_pre: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = x0.to_vec();
    let ax = apply(&x);
    let mut r: Vec<f64> = (0..n).map(|i| b[i] - ax[i]).collect();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = (0..n).map(|i| r[i] / diag_pre[i]).collect();
    let mut p = z.clone();
    let mut rz: f64 = (0..n).map(|i| r[i] * z[i]).sum();
    for _ in 0..10 * n + 100 {
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn <= 1e-15 * bnorm {
            break;
        }
        let ap = apply(&p);
        let pap: f64 = (0..n).map(|i| p[i] * ap[i]).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = (0..n).map(|i| r[i] / diag_pre[i]).collect();
        let rz_new: f64 = (0..n).map(|i| r[i] * z[i]).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// A measure at time `t` of the heat flow.
#[derive(Clone, Debug, Serialize)]
pub struct HeatState {
    pub t: f64,
    pub density: ProbVector,
}

/// Evolves the measure `initial` for time `t`.
///
/// Roundoff negatives are clamped, entries below a relative roundoff floor
/// are zeroed, and the result is renormalized to unit mass.
pub fn heat_flow(op: &WittenOperator, initial: &ProbVector, t: f64) -> Result<HeatState> {
    check_time(t)?;
    if initial.len() != op.n {
        return precondition("measure length does not match the operator");
    }
    if t == 0.0 {
        return Ok(HeatState { t, density: initial.clone() });
    }
    let raw = op.flow_measure_raw(initial.as_slice(), t);
    Ok(HeatState { t, density: clean_measure(raw)? })
}

/// Crank–Nicolson flow with an explicit number of steps, regardless of size.
/// Intended for cross-checking the exact propagator.
pub fn heat_flow_crank_nicolson(op: &WittenOperator, initial: &ProbVector, t: f64, steps: usize) -> Result<HeatState> {
    check_time(t)?;
    if steps == 0 {
        return precondition("at least one time step is required");
    }
    if initial.len() != op.n {
        return precondition("measure length does not match the operator");
    }
    let rho: Vec<f64> = initial.as_slice().iter().zip(&op.mass).map(|(m, w)| m / w).collect();
    let rho_t = op.crank_nicolson_steps(&rho, t, steps);
    let raw = rho_t.iter().zip(&op.mass).map(|(r, w)| r * w).collect();
    Ok(HeatState { t, density: clean_measure(raw)? })
}

fn clean_measure(mut raw: Vec<f64>) -> Result<ProbVector> {
    let mx = raw.iter().copied().fold(0.0f64, f64::max);
    let floor = ROUNDOFF_FLOOR * mx;
    for x in &mut raw {
        if *x < floor {
            *x = 0.0;
        }
    }
    ProbVector::normalized(raw)
}

/// Relative entropy `Σ μ_i log(μ_i / w_i)` with `0 log 0 = 0`.
pub fn entropy(space: &FiniteMMS, mu: &ProbVector) -> f64 {
    neumaier_sum(
        mu.as_slice()
            .iter()
            .zip(space.weight())
            .filter(|(&m, _)| m > 0.0)
            .map(|(&m, &w)| m * (m / w).ln()),
    )
}

/// `W(H_t δ_x, H_t δ_y)` for each `t` in `ts`.
pub fn contraction_curve(
    space: &FiniteMMS,
    op: &WittenOperator,
    x: usize,
    y: usize,
    ts: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let n = space.n();
    for &i in &[x, y] {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
    }
    if ts.iter().any(|&t| !(t > 0.0 && t.is_finite())) || ts.windows(2).any(|w| w[1] <= w[0]) {
        return precondition("times must be positive and strictly ascending");
    }
    if x == y {
        return Ok(ts.iter().map(|&t| (t, 0.0)).collect());
    }
    let dx = ProbVector::dirac(n, x)?;
    let dy = ProbVector::dirac(n, y)?;
    ts.iter()
        .map(|&t| {
            let mx = heat_flow(op, &dx, t)?.density;
            let my = heat_flow(op, &dy, t)?.density;
            let (w, _) = crate::transport::w2_exact(space, &mx, &my)?;
            Ok((t, w))
        })
        .collect()
}
