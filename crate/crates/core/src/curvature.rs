//! Curvature from heat-flow contraction, and the analytic tensors it is
//! compared against.
//!
//! * [`theta_plus`] turns a contraction curve `t ↦ W(H_tδ_x, H_tδ_y)` into the
//!   small-time rate `−(1/t) log(W_t/d)` extrapolated to `t = 0`.
//! * [`theta_star`] localizes that rate at a point over shrinking balls.
//! * [`ricci_infty`], [`ricci_n`], [`rho_gamma`], [`sigma_gamma`] and
//!   [`sturm_bounds`] evaluate the closed-form Bakry–Émery quantities on the
//!   model manifolds.
//! * [`beta_distortion`] and [`cd_convexity_check`] cover the entropy
//!   convexity side.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::heat::{contraction_curve, entropy, WittenOperator};
use crate::mms::{FiniteMMS, ModelKind, ModelManifold, ProbVector, SampledPath};
use crate::numeric::{polyfit, sinc, sinhc};
use crate::transport::{displacement_interpolate, w2_exact};

/// Default number of samples used to average along geodesics.
pub const GEODESIC_SAMPLES: usize = 2001;

/// Slack coefficient of [`cd_convexity_check`]: `0.05·|K|·W²`.
pub const CD_SLACK_FACTOR: f64 = 0.05;

/// Default additive allowance of [`cd_convexity_check`] for the error of
/// snapping interpolated atoms to grid points.
pub const CD_DEFAULT_ALLOWANCE: f64 = 1e-3;

/// Relative fit residual above which an estimate is flagged.
pub const LOW_CONFIDENCE_RATIO: f64 = 0.1;

/// An extrapolated contraction rate with its fit diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaEstimate {
    pub pair: (usize, usize),
    pub d: f64,
    pub value: f64,
    pub t_grid: Vec<f64>,
    /// `W_t` at each time.
    pub w: Vec<f64>,
    /// Finite-time quotients `−log(W_t/d)/t`.
    pub raw: Vec<f64>,
    /// RMS residual of the polynomial fit.
    pub fit_residual: f64,
    pub order: usize,
    pub low_confidence: bool,
}

impl ThetaEstimate {
    /// Refits the raw quotients; reproduces `value` and `fit_residual`.
    pub fn refit(t_grid: &[f64], raw: &[f64], order: usize) -> Result<(f64, f64)> {
        let (c, r) = polyfit(t_grid, raw, order)
            .ok_or_else(|| Error::Precondition(format!("need at least {} times for an order-{order} fit", order + 1)))?;
        Ok((c[0], r))
    }
}

/// Geometric time grid with `k` points from `t0` to `t1` inclusive.
pub fn geometric_grid(t0: f64, t1: f64, k: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0 && t1 > t0 && t1.is_finite()) || k < 2 {
        return precondition("geometric grid needs 0 < t0 < t1 and at least 2 points");
    }
    let r = (t1 / t0).ln() / (k - 1) as f64;
    Ok((0..k)
        .map(|i| if i + 1 == k { t1 } else { t0 * (r * i as f64).exp() })
        .collect())
}

/// θ⁺ estimate with a linear-in-`t` fit.
pub fn theta_plus(space: &FiniteMMS, op: &WittenOperator, x: usize, y: usize, t_grid: &[f64]) -> Result<ThetaEstimate> {
    theta_plus_with_order(space, op, x, y, t_grid, 1)
}

/// θ⁺ estimate with a polynomial fit of the given order.
///
/// The time grid must lie in `[2h², d(x,y)²]`, `h` the mesh size. Estimates
/// for `(x, y)` and `(y, x)` are identical.
pub fn theta_plus_with_order(
    space: &FiniteMMS,
    op: &WittenOperator,
    x: usize,
    y: usize,
    t_grid: &[f64],
    order: usize,
) -> Result<ThetaEstimate> {
    let n = space.n();
    for &i in &[x, y] {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
    }
    if x == y {
        return precondition("theta_plus needs two distinct points");
    }
    let d = space.dist(x, y);
    let (lo, hi) = time_window(op, d);
    let slack = 1e-12;
    if t_grid.iter().any(|&t| t < lo * (1.0 - slack) || t > hi * (1.0 + slack)) {
        return precondition(format!("time grid must lie in [2h², d²] = [{lo:e}, {hi:e}]"));
    }
    if t_grid.len() < order + 1 {
        return precondition(format!("need at least {} times for an order-{order} fit", order + 1));
    }
    let (a, b) = (x.min(y), x.max(y));
    let curve = contraction_curve(space, op, a, b, t_grid)?;
    let mut raw = Vec::with_capacity(curve.len());
    let mut w = Vec::with_capacity(curve.len());
    for &(t, wt) in &curve {
        if wt == 0.0 {
            return Err(Error::Coalesced { t });
        }
        w.push(wt);
        raw.push(-(wt / d).ln() / t);
    }
    let (value, fit_residual) = ThetaEstimate::refit(t_grid, &raw, order)?;
    Ok(ThetaEstimate {
        pair: (x, y),
        d,
        value,
        t_grid: t_grid.to_vec(),
        w,
        raw,
        fit_residual,
        order,
        low_confidence: fit_residual > LOW_CONFIDENCE_RATIO * value.abs(),
    })
}

/// Admissible time window `[2h², d²]` for a pair at distance `d`.
pub fn time_window(op: &WittenOperator, d: f64) -> (f64, f64) {
    (2.0 * op.mesh_h() * op.mesh_h(), d * d)
}

/// Options for [`theta_star`].
#[derive(Clone, Debug, Serialize)]
pub struct ThetaStarOptions {
    /// Times per pair, geometric between `2h²` and `window_fraction·d²`.
    pub t_points: usize,
    pub window_fraction: f64,
    pub order: usize,
    /// Worker threads for the pair sweep (`0` = rayon default).
    pub workers: usize,
}

impl Default for ThetaStarOptions {
    fn default() -> Self {
        Self { t_points: 6, window_fraction: 1.0, order: 1, workers: 0 }
    }
}

/// Per-radius result of [`theta_star`].
#[derive(Clone, Debug, Serialize)]
pub struct RadiusValue {
    pub radius: f64,
    pub value: f64,
    /// Maximizing pair.
    pub pair: (usize, usize),
    pub pairs: usize,
}

/// θ* at a point: the value at the smallest radius and the whole sequence.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaStar {
    pub x: usize,
    pub value: f64,
    pub per_radius: Vec<RadiusValue>,
    /// Pairs whose time window `[2h², f·d²]` was empty and were skipped.
    pub skipped_pairs: usize,
}

/// θ*(x): for each radius, the largest θ⁺ over pairs in the closed ball
/// `B_r(x)` at mutual distance at least `h`.
pub fn theta_star(
    space: &FiniteMMS,
    op: &WittenOperator,
    x: usize,
    radii: &[f64],
    opts: &ThetaStarOptions,
) -> Result<ThetaStar> {
    let n = space.n();
    if x >= n {
        return Err(Error::IndexOutOfRange { index: x, n });
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) {
        return precondition("radii must be a nonempty strictly descending list");
    }
    let h = op.mesh_h();
    let smallest = *radii.last().expect("nonempty");
    if smallest < 3.0 * h * (1.0 - 1e-12) {
        return precondition(format!("smallest radius {smallest} is below 3h = {}", 3.0 * h));
    }
    if !(opts.window_fraction > 0.0 && opts.window_fraction <= 1.0) || opts.t_points < opts.order + 1 {
        return precondition("window fraction must be in (0, 1] and there must be more times than fit coefficients");
    }
    let ball = space.ball(x, radii[0]);
    if ball.len() < 2 {
        return precondition(format!("ball of radius {} around {x} has fewer than 2 points", radii[0]));
    }
    let (t_lo, _) = time_window(op, 0.0);
    let mut tasks = Vec::new();
    let mut skipped = 0;
    for (a, &y) in ball.iter().enumerate() {
        for &z in &ball[a + 1..] {
            let d = space.dist(y, z);
            if d < h {
                continue;
            }
            let t_hi = opts.window_fraction * d * d;
            if t_hi <= t_lo {
                skipped += 1;
                continue;
            }
            tasks.push((y, z));
        }
    }
    let run = || -> Result<Vec<(usize, usize, f64)>> {
        tasks
            .par_iter()
            .map(|&(y, z)| {
                let d = space.dist(y, z);
                let grid = geometric_grid(t_lo, opts.window_fraction * d * d, opts.t_points)?;
                let est = theta_plus_with_order(space, op, y, z, &grid, opts.order)?;
                Ok((y, z, est.value))
            })
            .collect()
    };
    let values = if opts.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?
            .install(run)?
    } else {
        run()?
    };
    let mut per_radius = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut best: Option<(f64, (usize, usize))> = None;
        let mut count = 0;
        for &(y, z, v) in &values {
            if space.dist(x, y) <= r && space.dist(x, z) <= r {
                count += 1;
                if best.map_or(true, |(b, _)| v > b) {
                    best = Some((v, (y, z)));
                }
            }
        }
        let (value, pair) = best.ok_or_else(|| {
            Error::Precondition(format!("no admissible pair in the ball of radius {r} around {x}"))
        })?;
        per_radius.push(RadiusValue { radius: r, value, pair, pairs: count });
    }
    let value = per_radius.last().expect("nonempty").value;
    Ok(ThetaStar { x, value, per_radius, skipped_pairs: skipped })
}

fn unit_direction(model: &ModelManifold, direction: [f64; 2]) -> Result<[f64; 2]> {
    let xi = match model.kind {
        ModelKind::Circle { .. } => [direction[0], 0.0],
        _ => direction,
    };
    let norm = xi[0].hypot(xi[1]);
    if !(norm > 0.0 && norm.is_finite()) {
        return precondition("direction must be a nonzero tangent vector");
    }
    Ok([xi[0] / norm, xi[1] / norm])
}

/// `Ric(ξ,ξ) + Hess v(ξ,ξ)` at `point` for the unit vector along `direction`.
pub fn ricci_infty(model: &ModelManifold, point: [f64; 2], direction: [f64; 2]) -> Result<f64> {
    let xi = unit_direction(model, direction)?;
    let (_, _, h) = model.potential_jet(point);
    let hess = h[0][0] * xi[0] * xi[0] + 2.0 * h[0][1] * xi[0] * xi[1] + h[1][1] * xi[1] * xi[1];
    let ric = (model.dimension() as f64 - 1.0) * model.sectional_curvature();
    Ok(ric + hess)
}

/// `Ric_{∞,m}(ξ,ξ) − ⟨∇v, ξ⟩²/(N − n)`.
///
/// Requires `N ≥ n`; `N = n` is only allowed when `v` vanishes identically,
/// in which case the correction term is dropped.
pub fn ricci_n(model: &ModelManifold, point: [f64; 2], direction: [f64; 2], big_n: f64) -> Result<f64> {
    let n = model.dimension() as f64;
    if big_n.is_nan() || big_n < n {
        return precondition(format!("N = {big_n} is below the dimension {n}"));
    }
    let base = ricci_infty(model, point, direction)?;
    if big_n == n {
        if !model.potential.is_zero() {
            return precondition("N equal to the dimension requires a vanishing potential");
        }
        return Ok(base);
    }
    if big_n.is_infinite() {
        return Ok(base);
    }
    let xi = unit_direction(model, direction)?;
    let (_, g, _) = model.potential_jet(point);
    let dv = g[0] * xi[0] + g[1] * xi[1];
    Ok(base - dv * dv / (big_n - n))
}

/// Average of `Ric_{∞,m}(γ̇,γ̇)` along a sampled unit-speed geodesic (composite trapezoid).
pub fn rho_gamma(model: &ModelManifold, path: &SampledPath) -> Result<f64> {
    let k = path.points.len();
    if k < 2 || path.tangents.len() != k {
        return precondition("path needs at least two samples with tangents");
    }
    let vals: Vec<f64> = path
        .points
        .iter()
        .zip(&path.tangents)
        .map(|(&p, &v)| ricci_infty(model, p, v))
        .collect::<Result<_>>()?;
    let inner: f64 = crate::numeric::neumaier_sum(vals[1..k - 1].iter().copied());
    Ok((0.5 * (vals[0] + vals[k - 1]) + inner) / (k - 1) as f64)
}

/// `max_t (Σ_{i,j} R(e_i,γ̇,e_j,γ̇)²)^{1/2}`: the curvature constant of the sphere, zero on flat models.
pub fn sigma_gamma(model: &ModelManifold, _path: &SampledPath) -> f64 {
    match model.kind {
        ModelKind::Sphere { .. } => model.sectional_curvature(),
        _ => 0.0,
    }
}

/// Two-sided bracket `ρ ≤ θ⁺ ≤ ρ + σ tan²(√σ d/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SturmBounds {
    pub lower: f64,
    /// `+∞` once `√σ·d/2 ≥ π/2`.
    pub upper: f64,
    pub sigma: f64,
    pub d: f64,
}

impl SturmBounds {
    pub fn new(rho: f64, sigma: f64, d: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !(d >= 0.0) {
            return precondition("sigma and d must be nonnegative");
        }
        let upper = if sigma == 0.0 {
            rho
        } else {
            let arg = sigma.sqrt() * d / 2.0;
            if arg >= PI / 2.0 {
                f64::INFINITY
            } else {
                rho + sigma * arg.tan().powi(2)
            }
        };
        Ok(Self { lower: rho, upper, sigma, d })
    }

    pub fn upper_is_finite(&self) -> bool {
        self.upper.is_finite()
    }

    pub fn contains(&self, value: f64, tol: f64) -> bool {
        value >= self.lower - tol && value <= self.upper + tol
    }
}

/// Bounds along the minimizing geodesic between two model points.
pub fn sturm_bounds(model: &ModelManifold, x: [f64; 2], y: [f64; 2]) -> Result<SturmBounds> {
    let path = model.geodesic(x, y, GEODESIC_SAMPLES)?;
    let rho = rho_gamma(model, &path)?;
    SturmBounds::new(rho, sigma_gamma(model, &path), path.length)
}

/// Distortion coefficient `β_t^{(K,N)}(d)`.
///
/// `α = sqrt(|K|/(N−1))·d`; `β = (sin(tα)/(t sin α))^{N−1}` for `K > 0`
/// (`+∞` once `α > π`), the `sinh` analogue for `K < 0`, and `1` for `K = 0`.
/// The removable singularities at `t = 0` and `d = 0` are evaluated through
/// `sin(x)/x`.
pub fn beta_distortion(k: f64, big_n: f64, t: f64, d: f64) -> Result<f64> {
    if !(big_n > 1.0) {
        return precondition("N must exceed 1");
    }
    if !(0.0..=1.0).contains(&t) {
        return precondition("t must lie in [0, 1]");
    }
    if !(d >= 0.0) || k.is_nan() {
        return precondition("d must be nonnegative");
    }
    if k == 0.0 {
        return Ok(1.0);
    }
    let alpha = (k.abs() / (big_n - 1.0)).sqrt() * d;
    let ratio = if k > 0.0 {
        if alpha > PI {
            return Ok(f64::INFINITY);
        }
        // sin(tα)/(t sin α) = sinc(tα)/sinc(α)
        let s = sinc(alpha);
        if s <= 0.0 {
            return Ok(f64::INFINITY);
        }
        sinc(t * alpha) / s
    } else {
        sinhc(t * alpha) / sinhc(alpha)
    };
    Ok(ratio.powf(big_n - 1.0))
}

/// One time of a CD(K,∞) check.
#[derive(Clone, Debug, Serialize)]
pub struct CdPoint {
    pub t: f64,
    pub entropy: f64,
    /// `(1−t)Ent(μ₀) + t Ent(μ₁) − (K/2) t(1−t) W²`.
    pub bound: f64,
    /// `bound − entropy`; negative means the inequality is violated.
    pub slack: f64,
    pub pass: bool,
}

/// Outcome of [`cd_convexity_check`].
#[derive(Clone, Debug, Serialize)]
pub struct CdReport {
    pub k: f64,
    pub w2: f64,
    pub tolerance: f64,
    pub points: Vec<CdPoint>,
    pub worst_slack: f64,
    pub passed: bool,
}

/// Checks `Ent(μ_t) ≤ (1−t)Ent(μ₀) + t Ent(μ₁) − (K/2)t(1−t)W²` along the
/// plan-based interpolation between `mu0` and `mu1`, with tolerance
/// `0.05·|K|·W² + CD_DEFAULT_ALLOWANCE`.
pub fn cd_convexity_check(
    space: &FiniteMMS,
    model: &ModelManifold,
    mu0: &ProbVector,
    mu1: &ProbVector,
    k: f64,
    ts: &[f64],
) -> Result<CdReport> {
    cd_convexity_check_with_allowance(space, model, mu0, mu1, k, ts, CD_DEFAULT_ALLOWANCE)
}

/// [`cd_convexity_check`] with an explicit discretization allowance.
pub fn cd_convexity_check_with_allowance(
    space: &FiniteMMS,
    model: &ModelManifold,
    mu0: &ProbVector,
    mu1: &ProbVector,
    k: f64,
    ts: &[f64],
    allowance: f64,
) -> Result<CdReport> {
    if ts.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return precondition("interpolation times must lie in [0, 1]");
    }
    if !(allowance >= 0.0) {
        return precondition("allowance must be nonnegative");
    }
    let (w, plan) = w2_exact(space, mu0, mu1)?;
    let w2 = w * w;
    let e0 = entropy(space, mu0);
    let e1 = entropy(space, mu1);
    let tolerance = CD_SLACK_FACTOR * k.abs() * w2 + allowance;
    let mut points = Vec::with_capacity(ts.len());
    for &t in ts {
        let mu_t = displacement_interpolate(space, &plan, t, Some(model))?;
        let ent = if t == 0.0 {
            e0
        } else if t == 1.0 {
            e1
        } else {
            entropy(space, &mu_t)
        };
        let bound = if t == 0.0 {
            e0
        } else if t == 1.0 {
            e1
        } else {
            (1.0 - t) * e0 + t * e1 - 0.5 * k * t * (1.0 - t) * w2
        };
        let slack = bound - ent;
        points.push(CdPoint { t, entropy: ent, bound, slack, pass: slack >= -tolerance });
    }
    let worst_slack = points.iter().map(|p| p.slack).fold(f64::INFINITY, f64::min);
    let passed = points.iter().all(|p| p.pass);
    Ok(CdReport { k, w2, tolerance, points, worst_slack, passed })
}
