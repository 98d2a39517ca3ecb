//! Finite metric measure spaces, probability vectors, and the analytic
//! weighted model manifolds (circle, round sphere, flat torus) that get
//! discretized into them.
//!
//! A [`FiniteMMS`] is a distance matrix plus positive cell masses, optionally
//! carrying mesh edges (needed by the heat module) and per-point model
//! coordinates (needed to place mass on model geodesics).

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};

/// Tolerance on the total mass of a [`ProbVector`].
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A mesh edge with its length (equal to the corresponding distance entry).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

/// A finite metric measure space.
///
/// Distances are stored row-major. Construction only checks shapes; use
/// [`FiniteMMS::validate`] to check the metric and measure invariants.
#[derive(Clone, Debug)]
pub struct FiniteMMS {
    n: usize,
    dist: Vec<f64>,
    weight: Vec<f64>,
    adjacency: Vec<Edge>,
    labels: Option<Vec<[f64; 2]>>,
}

impl FiniteMMS {
    /// Builds a space from a row-major `n × n` distance matrix and `n` weights.
    pub fn new(dist: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        let n = weight.len();
        if dist.len() != n * n {
            return precondition(format!(
                "distance matrix has {} entries, expected {n}x{n}",
                dist.len()
            ));
        }
        Ok(Self { n, dist, weight, adjacency: Vec::new(), labels: None })
    }

    /// Builds a space from distance rows.
    pub fn from_rows(rows: &[Vec<f64>], weight: Vec<f64>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != rows.len()) {
            return precondition("distance matrix is not square");
        }
        Self::new(rows.concat(), weight)
    }

    /// Attaches mesh edges. Indices must be in range and distinct.
    pub fn with_adjacency(mut self, edges: Vec<Edge>) -> Result<Self> {
        for e in &edges {
            if e.i >= self.n || e.j >= self.n {
                return Err(Error::IndexOutOfRange { index: e.i.max(e.j), n: self.n });
            }
            if e.i == e.j {
                return precondition(format!("self-loop edge at {}", e.i));
            }
        }
        self.adjacency = edges;
        Ok(self)
    }

    /// Attaches adjacency for the given index pairs, taking lengths from the distance matrix.
    pub fn with_edges_from_dist(self, pairs: &[(usize, usize)]) -> Result<Self> {
        let edges = pairs
            .iter()
            .map(|&(i, j)| Edge { i, j, length: if i < self.n && j < self.n { self.dist(i, j) } else { 0.0 } })
            .collect();
        self.with_adjacency(edges)
    }

    pub fn with_labels(mut self, labels: Vec<[f64; 2]>) -> Result<Self> {
        if labels.len() != self.n {
            return precondition(format!("{} labels for {} points", labels.len(), self.n));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// The cycle graph `C_n` with edge length `edge` and unit weights.
    pub fn cycle(n: usize, edge: f64) -> Self {
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i.abs_diff(j);
                dist[i * n + j] = edge * k.min(n - k) as f64;
            }
        }
        let pairs: Vec<_> = if n >= 3 {
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        } else if n == 2 {
            vec![(0, 1)]
        } else {
            Vec::new()
        };
        Self { n, dist, weight: vec![1.0; n], adjacency: Vec::new(), labels: None }
            .with_edges_from_dist(&pairs)
            .expect("cycle edges are in range")
    }

    /// An `nx × ny` grid on the flat torus `[0,a) × [0,b)` with uniform cell masses.
    pub fn flat_torus_grid(nx: usize, ny: usize, a: f64, b: f64) -> Self {
        torus_grid(nx, ny, a, b, |_| 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn dist_row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// Row-major distance matrix.
    pub fn dist_matrix(&self) -> &[f64] {
        &self.dist
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn total_mass(&self) -> f64 {
        crate::numeric::neumaier_sum(self.weight.iter().copied())
    }

    pub fn adjacency(&self) -> &[Edge] {
        &self.adjacency
    }

    pub fn labels(&self) -> Option<&[[f64; 2]]> {
        self.labels.as_deref()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Largest mesh edge length, or 0 without adjacency.
    pub fn max_edge_length(&self) -> f64 {
        self.adjacency.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    /// Indices of all points within closed distance `r` of point `x`.
    pub fn ball(&self, x: usize, r: f64) -> Vec<usize> {
        self.dist_row(x)
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= r)
            .map(|(i, _)| i)
            .collect()
    }

    /// Checks every metric, measure and adjacency invariant.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.n;
        let dmax = self.diameter();
        let tri_tol = 1e-9 * dmax;
        for i in 0..n {
            for j in 0..n {
                let d = self.dist(i, j);
                if !d.is_finite() {
                    report.push(Violation::NonFinite { i, j });
                    continue;
                }
                if i == j {
                    if d != 0.0 {
                        report.push(Violation::NonzeroDiagonal { i, value: d });
                    }
                } else {
                    if d <= 0.0 {
                        report.push(Violation::NonPositiveDistance { i, j, value: d });
                    }
                    if j > i && d != self.dist(j, i) {
                        report.push(Violation::Asymmetric { i, j, dij: d, dji: self.dist(j, i) });
                    }
                }
            }
        }
        for i in 0..n {
            let ri = self.dist_row(i);
            for k in 0..n {
                let dik = ri[k];
                let rk = self.dist_row(k);
                for j in 0..n {
                    let excess = ri[j] - (dik + rk[j]);
                    if excess > tri_tol {
                        report.push(Violation::Triangle { i, j, via: k, excess });
                    }
                }
            }
        }
        for (i, &w) in self.weight.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                report.push(Violation::NonPositiveWeight { i, value: w });
            }
        }
        for e in &self.adjacency {
            let d = self.dist(e.i, e.j);
            if (e.length - d).abs() > 1e-12 * dmax.max(1.0) {
                report.push(Violation::EdgeLength { i: e.i, j: e.j, length: e.length, dist: d });
            }
        }
        report
    }
}

/// Invariant violations found by [`FiniteMMS::validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonFinite { i: usize, j: usize },
    NonzeroDiagonal { i: usize, value: f64 },
    NonPositiveDistance { i: usize, j: usize, value: f64 },
    Asymmetric { i: usize, j: usize, dij: f64, dji: f64 },
    Triangle { i: usize, j: usize, via: usize, excess: f64 },
    NonPositiveWeight { i: usize, value: f64 },
    EdgeLength { i: usize, j: usize, length: f64, dist: f64 },
}

/// Result of a validation pass. At most [`ValidationReport::MAX_LISTED`]
/// violations are listed; `total` counts all of them.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub total: usize,
}

impl ValidationReport {
    pub const MAX_LISTED: usize = 256;

    pub fn push(&mut self, v: Violation) {
        self.total += 1;
        if self.violations.len() < Self::MAX_LISTED {
            self.violations.push(v);
        }
    }

    pub fn is_valid(&self) -> bool {
        self.total == 0
    }
}

/// A probability vector over the points of a finite space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Checks nonnegativity and unit mass (within [`PROB_SUM_TOL`]).
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return precondition("empty probability vector");
        }
        if let Some(i) = p.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return precondition(format!("entry {i} is negative or not finite: {}", p[i]));
        }
        let s = crate::numeric::neumaier_sum(p.iter().copied());
        if (s - 1.0).abs() > PROB_SUM_TOL {
            return precondition(format!("entries sum to {s}, not 1"));
        }
        Ok(Self(p))
    }

    /// Rescales a nonnegative vector with positive total to unit mass.
    pub fn normalized(p: Vec<f64>) -> Result<Self> {
        if let Some(i) = p.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return precondition(format!("entry {i} is negative or not finite: {}", p[i]));
        }
        let s = crate::numeric::neumaier_sum(p.iter().copied());
        if s <= 0.0 {
            return precondition("vector has zero mass");
        }
        Ok(Self(p.into_iter().map(|x| x / s).collect()))
    }

    pub fn dirac(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        Ok(Self(p))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Indices with strictly positive mass.
    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(i, _)| i).collect()
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// The Dirac measure at point `i` of `space`.
pub fn dirac(space: &FiniteMMS, i: usize) -> Result<ProbVector> {
    ProbVector::dirac(space.n(), i)
}

/// A finite Fourier series `c + Σ_k (a_k cos kθ + b_k sin kθ)` in an angle.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    pub constant: f64,
    /// `(k, a_k)` cosine coefficients.
    pub cos: Vec<(u32, f64)>,
    /// `(k, b_k)` sine coefficients.
    pub sin: Vec<(u32, f64)>,
}

impl FourierSeries {
    /// Value and first two derivatives with respect to the angle.
    pub fn eval(&self, theta: f64) -> [f64; 3] {
        let mut out = [self.constant, 0.0, 0.0];
        for &(k, a) in &self.cos {
            let k = k as f64;
            let (s, c) = (k * theta).sin_cos();
            out[0] += a * c;
            out[1] -= a * k * s;
            out[2] -= a * k * k * c;
        }
        for &(k, b) in &self.sin {
            let k = k as f64;
            let (s, c) = (k * theta).sin_cos();
            out[0] += b * s;
            out[1] += b * k * c;
            out[2] -= b * k * k * s;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0
            && self.cos.iter().all(|&(_, a)| a == 0.0)
            && self.sin.iter().all(|&(_, b)| b == 0.0)
    }
}

/// Weight potential `v` of `m = e^{-v} vol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Potential {
    /// Circle: Fourier series in the angle.
    Fourier(FourierSeries),
    /// Sphere: `v = Σ_k c_k cos^k(polar angle)`, axially symmetric.
    AxialPolynomial { coeffs: Vec<f64> },
    /// Torus: `v = f(2πx/a) + g(2πy/b)`.
    Separable { x: FourierSeries, y: FourierSeries },
}

impl Potential {
    pub fn is_zero(&self) -> bool {
        match self {
            Potential::Fourier(f) => f.is_zero(),
            Potential::AxialPolynomial { coeffs } => coeffs.iter().all(|&c| c == 0.0),
            Potential::Separable { x, y } => x.is_zero() && y.is_zero(),
        }
    }
}

/// Shape of a model manifold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Circle { radius: f64 },
    Sphere { radius: f64 },
    Torus { a: f64, b: f64 },
}

/// A minimizing geodesic sampled at equal arclength steps.
///
/// `tangents[k]` is the unit velocity at `points[k]`, expressed in the
/// model's orthonormal frame at that point.
#[derive(Clone, Debug, Serialize)]
pub struct SampledPath {
    pub length: f64,
    pub points: Vec<[f64; 2]>,
    pub tangents: Vec<[f64; 2]>,
}

/// A weighted constant-curvature model `(M, g, e^{-v} vol_g)`.
///
/// Points are `[θ, 0]` on the circle, `[polar, azimuth]` on the sphere and
/// `[x, y]` on the torus. Tangent vectors use the orthonormal frames
/// `(∂_s)`, `(e_polar, e_azimuth)` and `(e_x, e_y)` respectively.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelManifold {
    pub kind: ModelKind,
    pub potential: Potential,
}

impl ModelManifold {
    pub fn new(kind: ModelKind, potential: Potential) -> Result<Self> {
        let ok_shape = match kind {
            ModelKind::Circle { radius } | ModelKind::Sphere { radius } => radius > 0.0 && radius.is_finite(),
            ModelKind::Torus { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
        };
        if !ok_shape {
            return precondition("model lengths must be positive and finite");
        }
        let ok_pot = matches!(
            (&kind, &potential),
            (ModelKind::Circle { .. }, Potential::Fourier(_))
                | (ModelKind::Sphere { .. }, Potential::AxialPolynomial { .. })
                | (ModelKind::Torus { .. }, Potential::Separable { .. })
        );
        if !ok_pot {
            return precondition("potential form does not match the model kind");
        }
        Ok(Self { kind, potential })
    }

    pub fn circle(radius: f64, v: FourierSeries) -> Result<Self> {
        Self::new(ModelKind::Circle { radius }, Potential::Fourier(v))
    }

    pub fn sphere(radius: f64, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(ModelKind::Sphere { radius }, Potential::AxialPolynomial { coeffs })
    }

    pub fn torus(a: f64, b: f64, x: FourierSeries, y: FourierSeries) -> Result<Self> {
        Self::new(ModelKind::Torus { a, b }, Potential::Separable { x, y })
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            ModelKind::Circle { .. } => 1,
            _ => 2,
        }
    }

    /// Constant sectional curvature (the circle uses the curve convention `R = 0`).
    pub fn sectional_curvature(&self) -> f64 {
        match self.kind {
            ModelKind::Sphere { radius } => 1.0 / (radius * radius),
            _ => 0.0,
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self.kind {
            ModelKind::Circle { radius } | ModelKind::Sphere { radius } => PI * radius,
            ModelKind::Torus { a, b } => 0.5 * a.min(b),
        }
    }

    /// `v(p)`.
    pub fn potential_at(&self, p: [f64; 2]) -> f64 {
        self.potential_jet(p).0
    }

    /// Value, gradient and Hessian of `v` in the orthonormal frame at `p`.
    pub fn potential_jet(&self, p: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        match (&self.kind, &self.potential) {
            (ModelKind::Circle { radius }, Potential::Fourier(f)) => {
                let [v, d1, d2] = f.eval(p[0]);
                (v, [d1 / radius, 0.0], [[d2 / (radius * radius), 0.0], [0.0, 0.0]])
            }
            (ModelKind::Sphere { radius }, Potential::AxialPolynomial { coeffs }) => {
                let (s, c) = p[0].sin_cos();
                let (f, f1, f2) = poly_jet(coeffs, c);
                let r2 = radius * radius;
                // v_θ = -f'(c) sinθ, v_θθ = f''(c) sin²θ - f'(c) cosθ,
                // Hess(e_φ, e_φ) = cotθ v_θ / r² = -f'(c) cosθ / r².
                let grad = [-f1 * s / radius, 0.0];
                let h_pp = (f2 * s * s - f1 * c) / r2;
                let h_aa = -f1 * c / r2;
                (f, grad, [[h_pp, 0.0], [0.0, h_aa]])
            }
            (ModelKind::Torus { a, b }, Potential::Separable { x, y }) => {
                let kx = TAU / a;
                let ky = TAU / b;
                let [fx, fx1, fx2] = x.eval(kx * p[0]);
                let [gy, gy1, gy2] = y.eval(ky * p[1]);
                (fx + gy, [fx1 * kx, gy1 * ky], [[fx2 * kx * kx, 0.0], [0.0, gy2 * ky * ky]])
            }
            _ => unreachable!("constructor enforces matching potential"),
        }
    }

    /// Geodesic distance between two model points.
    pub fn distance(&self, p: [f64; 2], q: [f64; 2]) -> f64 {
        match self.kind {
            ModelKind::Circle { radius } => radius * wrap_angle(q[0] - p[0]).abs(),
            ModelKind::Sphere { radius } => radius * sphere_angle(p, q),
            ModelKind::Torus { a, b } => {
                let mut best = f64::INFINITY;
                for sx in -1..=1 {
                    for sy in -1..=1 {
                        let dx = q[0] - p[0] + sx as f64 * a;
                        let dy = q[1] - p[1] + sy as f64 * b;
                        best = best.min(dx.hypot(dy));
                    }
                }
                best
            }
        }
    }

    /// The minimizing unit-speed geodesic from `p` to `q`, sampled at
    /// `samples` points equally spaced in arclength.
    pub fn geodesic(&self, p: [f64; 2], q: [f64; 2], samples: usize) -> Result<SampledPath> {
        if samples < 2 {
            return precondition("a sampled geodesic needs at least 2 samples");
        }
        let steps = (samples - 1) as f64;
        match self.kind {
            ModelKind::Circle { radius } => {
                let delta = wrap_angle(q[0] - p[0]);
                check_not_cut(delta.abs(), PI, "antipodal points on the circle")?;
                let sign = delta.signum();
                let points = (0..samples)
                    .map(|k| {
                        let th = if k + 1 == samples { q[0] } else { p[0] + delta * k as f64 / steps };
                        [th.rem_euclid(TAU), 0.0]
                    })
                    .collect();
                Ok(SampledPath { length: radius * delta.abs(), points, tangents: vec![[sign, 0.0]; samples] })
            }
            ModelKind::Sphere { radius } => {
                let a = to_cartesian(p);
                let b = to_cartesian(q);
                let omega = sphere_angle(p, q);
                check_not_cut(omega, PI, "antipodal points on the sphere")?;
                let so = omega.sin();
                let mut points = Vec::with_capacity(samples);
                let mut tangents = Vec::with_capacity(samples);
                for k in 0..samples {
                    let s = k as f64 / steps;
                    let (ca, cb) = ((1.0 - s) * omega, s * omega);
                    let pos = if k == 0 {
                        a
                    } else if k + 1 == samples {
                        b
                    } else {
                        let (wa, wb) = (ca.sin() / so, cb.sin() / so);
                        normalize3([wa * a[0] + wb * b[0], wa * a[1] + wb * b[1], wa * a[2] + wb * b[2]])
                    };
                    let (va, vb) = (-ca.cos(), cb.cos());
                    let vel = normalize3([va * a[0] + vb * b[0], va * a[1] + vb * b[1], va * a[2] + vb * b[2]]);
                    let pt = if k == 0 {
                        p
                    } else if k + 1 == samples {
                        q
                    } else {
                        from_cartesian(pos)
                    };
                    let (e_pol, e_az) = sphere_frame(pt);
                    points.push(pt);
                    tangents.push([dot3(vel, e_pol), dot3(vel, e_az)]);
                }
                Ok(SampledPath { length: radius * omega, points, tangents })
            }
            ModelKind::Torus { a, b } => {
                let dx = wrap_half(q[0] - p[0], a);
                let dy = wrap_half(q[1] - p[1], b);
                if (dx.abs() - 0.5 * a).abs() <= 1e-12 * a || (dy.abs() - 0.5 * b).abs() <= 1e-12 * b {
                    return Err(Error::NoUniqueGeodesic("pair on the torus cut locus".into()));
                }
                let len = dx.hypot(dy);
                if len == 0.0 {
                    return Err(Error::NoUniqueGeodesic("coincident endpoints".into()));
                }
                let points = (0..samples)
                    .map(|k| {
                        if k + 1 == samples {
                            q
                        } else {
                            let s = k as f64 / steps;
                            [(p[0] + s * dx).rem_euclid(a), (p[1] + s * dy).rem_euclid(b)]
                        }
                    })
                    .collect();
                Ok(SampledPath { length: len, points, tangents: vec![[dx / len, dy / len]; samples] })
            }
        }
    }

    /// The point at fraction `t ∈ [0, 1]` of the minimizing geodesic from `p` to `q`.
    pub fn geodesic_point(&self, p: [f64; 2], q: [f64; 2], t: f64) -> Result<[f64; 2]> {
        if t == 0.0 {
            return Ok(p);
        }
        if t == 1.0 {
            return Ok(q);
        }
        match self.kind {
            ModelKind::Circle { .. } => {
                let delta = wrap_angle(q[0] - p[0]);
                check_not_cut(delta.abs(), PI, "antipodal points on the circle")?;
                Ok([(p[0] + t * delta).rem_euclid(TAU), 0.0])
            }
            ModelKind::Sphere { .. } => {
                let a = to_cartesian(p);
                let b = to_cartesian(q);
                let omega = sphere_angle(p, q);
                check_not_cut(omega, PI, "antipodal points on the sphere")?;
                let so = omega.sin();
                let (wa, wb) = (((1.0 - t) * omega).sin() / so, (t * omega).sin() / so);
                Ok(from_cartesian(normalize3([
                    wa * a[0] + wb * b[0],
                    wa * a[1] + wb * b[1],
                    wa * a[2] + wb * b[2],
                ])))
            }
            ModelKind::Torus { a, b } => {
                // rejects cut-locus and coincident pairs
                self.geodesic(p, q, 2)?;
                let dx = wrap_half(q[0] - p[0], a);
                let dy = wrap_half(q[1] - p[1], b);
                Ok([(p[0] + t * dx).rem_euclid(a), (p[1] + t * dy).rem_euclid(b)])
            }
        }
    }

    /// Samples the model on a regular parameter grid.
    ///
    /// * circle: `resolution` equally spaced angles;
    /// * sphere: `resolution` cell-centred polar rows × `2·resolution` azimuths;
    /// * torus: `resolution × resolution` grid.
    ///
    /// Distances are exact model distances, masses are `e^{-v}` at the
    /// sample times the exact cell area, adjacency links grid neighbours.
    pub fn discretize(&self, resolution: usize) -> Result<FiniteMMS> {
        let inj = self.injectivity_radius();
        let cell = match self.kind {
            ModelKind::Circle { radius } => TAU * radius / resolution as f64,
            ModelKind::Sphere { radius } => PI * radius / resolution as f64,
            ModelKind::Torus { a, b } => a.max(b) / resolution as f64,
        };
        if resolution == 0 || cell > 0.5 * inj {
            return Err(Error::ResolutionTooSmall { resolution, cell, inj });
        }
        let space = match self.kind {
            ModelKind::Circle { radius } => self.discretize_circle(radius, resolution),
            ModelKind::Sphere { radius } => self.discretize_sphere(radius, resolution),
            ModelKind::Torus { a, b } => torus_grid(resolution, resolution, a, b, |p| self.potential_at(p)),
        };
        Ok(space)
    }

    fn discretize_circle(&self, radius: f64, n: usize) -> FiniteMMS {
        let cell = TAU * radius / n as f64;
        let labels: Vec<[f64; 2]> = (0..n).map(|i| [TAU * i as f64 / n as f64, 0.0]).collect();
        let weight = labels.iter().map(|&p| (-self.potential_at(p)).exp() * cell).collect();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i.abs_diff(j);
                dist[i * n + j] = radius * TAU * k.min(n - k) as f64 / n as f64;
            }
        }
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        FiniteMMS { n, dist, weight, adjacency: Vec::new(), labels: None }
            .with_edges_from_dist(&pairs)
            .and_then(|s| s.with_labels(labels))
            .expect("grid indices are in range")
    }

    fn discretize_sphere(&self, radius: f64, rows: usize) -> FiniteMMS {
        let cols = 2 * rows;
        let n = rows * cols;
        let dth = PI / rows as f64;
        let dph = TAU / cols as f64;
        let mut labels = Vec::with_capacity(n);
        let mut weight = Vec::with_capacity(n);
        for k in 0..rows {
            let th = (k as f64 + 0.5) * dth;
            let area = radius * radius * dph * ((k as f64 * dth).cos() - ((k + 1) as f64 * dth).cos());
            for l in 0..cols {
                let p = [th, l as f64 * dph];
                labels.push(p);
                weight.push((-self.potential_at(p)).exp() * area);
            }
        }
        let cart: Vec<[f64; 3]> = labels.iter().map(|&p| to_cartesian(p)).collect();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = radius * angle_between(cart[i], cart[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let idx = |k: usize, l: usize| k * cols + (l % cols);
        let mut pairs = Vec::new();
        for k in 0..rows {
            for l in 0..cols {
                pairs.push((idx(k, l), idx(k, l + 1)));
                if k + 1 < rows {
                    pairs.push((idx(k, l), idx(k + 1, l)));
                }
            }
        }
        FiniteMMS { n, dist, weight, adjacency: Vec::new(), labels: None }
            .with_edges_from_dist(&pairs)
            .and_then(|s| s.with_labels(labels))
            .expect("grid indices are in range")
    }
}

fn torus_grid(nx: usize, ny: usize, a: f64, b: f64, v: impl Fn([f64; 2]) -> f64) -> FiniteMMS {
    let n = nx * ny;
    let (hx, hy) = (a / nx as f64, b / ny as f64);
    let labels: Vec<[f64; 2]> = (0..nx)
        .flat_map(|i| (0..ny).map(move |j| [i as f64 * hx, j as f64 * hy]))
        .collect();
    let weight = labels.iter().map(|&p| (-v(p)).exp() * hx * hy).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (p, q) = (labels[i], labels[j]);
            let mut best = f64::INFINITY;
            for sx in -1..=1 {
                for sy in -1..=1 {
                    let dx = q[0] - p[0] + sx as f64 * a;
                    let dy = q[1] - p[1] + sy as f64 * b;
                    best = best.min(dx.hypot(dy));
                }
            }
            dist[i * n + j] = best;
        }
    }
    let idx = |i: usize, j: usize| (i % nx) * ny + (j % ny);
    let mut pairs = BTreeSet::new();
    for i in 0..nx {
        for j in 0..ny {
            for (p, q) in [(idx(i, j), idx(i + 1, j)), (idx(i, j), idx(i, j + 1))] {
                if p != q {
                    pairs.insert((p.min(q), p.max(q)));
                }
            }
        }
    }
    let pairs: Vec<_> = pairs.into_iter().collect();
    FiniteMMS { n, dist, weight, adjacency: Vec::new(), labels: None }
        .with_edges_from_dist(&pairs)
        .and_then(|s| s.with_labels(labels))
        .expect("grid indices are in range")
}

fn check_not_cut(separation: f64, cut: f64, what: &str) -> Result<()> {
    if separation == 0.0 {
        return Err(Error::NoUniqueGeodesic("coincident endpoints".into()));
    }
    if separation >= cut - 1e-12 * cut {
        return Err(Error::NoUniqueGeodesic(what.into()));
    }
    Ok(())
}

/// `(f(c), f'(c), f''(c))` for `f(c) = Σ_k coeffs[k] c^k`.
fn poly_jet(coeffs: &[f64], c: f64) -> (f64, f64, f64) {
    let (mut f, mut f1, mut f2) = (0.0, 0.0, 0.0);
    for &a in coeffs.iter().rev() {
        f2 = f2 * c + 2.0 * f1;
        f1 = f1 * c + f;
        f = f * c + a;
    }
    (f, f1, f2)
}

/// Wraps an angle difference into `(-π, π]`.
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

fn wrap_half(x: f64, period: f64) -> f64 {
    x - period * (x / period).round()
}

fn to_cartesian(p: [f64; 2]) -> [f64; 3] {
    let (st, ct) = p[0].sin_cos();
    let (sp, cp) = p[1].sin_cos();
    [st * cp, st * sp, ct]
}

fn from_cartesian(v: [f64; 3]) -> [f64; 2] {
    let polar = v[0].hypot(v[1]).atan2(v[2]);
    let az = v[1].atan2(v[0]).rem_euclid(TAU);
    [polar, az]
}

fn sphere_frame(p: [f64; 2]) -> ([f64; 3], [f64; 3]) {
    let (st, ct) = p[0].sin_cos();
    let (sp, cp) = p[1].sin_cos();
    ([ct * cp, ct * sp, -st], [-sp, cp, 0.0])
}

fn sphere_angle(p: [f64; 2], q: [f64; 2]) -> f64 {
    angle_between(to_cartesian(p), to_cartesian(q))
}

fn angle_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    sin.atan2(dot3(a, b))
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = dot3(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}
