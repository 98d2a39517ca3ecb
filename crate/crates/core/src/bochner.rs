//! The explicit constants of the quantitative finiteness bounds: the
//! displacement constants `C₁, C₂, δ₀`, the threshold `δ`, the volume
//! comparison packing count `L` with `L₁ = L!`, the variant threshold with
//! externally supplied constants, and the `L^{n/2}` smallness hypothesis.
//!
//! Every report keeps each branch of each `min` so the binding constraint
//! can be audited.

use std::f64::consts::PI;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::error::{precondition, Error, Result};
use crate::isometry::pigeonhole_bound;
use crate::mms::FiniteMMS;
use crate::numeric::{integrate, neumaier_sum, sinhc};

/// Relative accuracy requested from the volume quadrature.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Packing ratios within this relative distance of an integer are snapped to it
/// before rounding up, so quadrature roundoff cannot add a spurious ball.
pub const INTEGER_SNAP: f64 = 1e-9;

/// Geometric and analytic budget of a weighted manifold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryBudget {
    /// Dimension `n ≥ 2`.
    pub n: usize,
    /// Bakry–Émery parameter `N ≥ n`.
    pub big_n: f64,
    pub i0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Lower Ricci budget; only needed for the packing count.
    pub lambda3: Option<f64>,
    /// Total measure bound.
    pub v: f64,
    /// Diameter bound.
    pub d: f64,
    /// Bound on `sup e^{−v}`; only needed for the variant threshold.
    pub e: Option<f64>,
    pub w: f64,
    /// Sobolev constants.
    pub a: f64,
    pub b: f64,
}

impl GeometryBudget {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return precondition(format!("dimension n = {} must be at least 2", self.n));
        }
        if !(self.big_n >= self.n as f64) {
            return precondition(format!("N = {} must be at least n = {}", self.big_n, self.n));
        }
        let named = [
            ("i0", Some(self.i0)),
            ("Lambda1", Some(self.lambda1)),
            ("Lambda2", Some(self.lambda2)),
            ("Lambda3", self.lambda3),
            ("V", Some(self.v)),
            ("D", Some(self.d)),
            ("E", self.e),
            ("w", Some(self.w)),
            ("A", Some(self.a)),
            ("B", Some(self.b)),
        ];
        for (name, value) in named {
            if let Some(x) = value {
                if !(x > 0.0 && x.is_finite()) {
                    return precondition(format!("{name} = {x} must be positive and finite"));
                }
            }
        }
        Ok(())
    }
}

/// One branch of a `min`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Branch {
    pub name: &'static str,
    pub value: f64,
}

fn min_of(branches: &[Branch]) -> (f64, &'static str) {
    branches
        .iter()
        .fold((f64::INFINITY, ""), |(v, n), b| if b.value < v { (b.value, b.name) } else { (v, n) })
}

/// `C₁ = 4(n−1)Λ`, `C₂ = sqrt((n−1)Λ/2)`, `δ₀ = min(i₀/2, π/(2C₂))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SectorConstants {
    pub c1: f64,
    pub c2: f64,
    pub delta0: f64,
}

pub fn sector_constants(n: usize, lambda: f64, i0: f64) -> Result<SectorConstants> {
    if n < 2 {
        return precondition(format!("dimension n = {n} must be at least 2"));
    }
    if !(lambda > 0.0) || !(i0 > 0.0) {
        return precondition("Lambda and i0 must be positive");
    }
    let m = (n - 1) as f64;
    let c1 = 4.0 * m * lambda;
    let c2 = (m * lambda / 2.0).sqrt();
    let delta0 = (i0 / 2.0).min(PI / (2.0 * c2));
    Ok(SectorConstants { c1, c2, delta0 })
}

/// The displacement threshold with every branch of its minimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaReport {
    pub delta: f64,
    pub binding: &'static str,
    pub branches: Vec<Branch>,
    pub sector: SectorConstants,
}

/// `δ = min{δ₀, arctan(sqrt(w/(2C₁)))/C₂, 1/(4AΛ₂V^{2/n}), w/(2BΛ₂V^{2/n})}`.
pub fn angle_delta(budget: &GeometryBudget) -> Result<DeltaReport> {
    budget.validate()?;
    let l41 = sector_constants(budget.n, budget.lambda1, budget.i0)?;
    let vn = budget.v.powf(2.0 / budget.n as f64);
    let branches = vec![
        Branch { name: "delta0", value: l41.delta0 },
        Branch { name: "arctan", value: (budget.w / (2.0 * l41.c1)).sqrt().atan() / l41.c2 },
        Branch { name: "sobolev_a", value: 1.0 / (4.0 * budget.a * budget.lambda2 * vn) },
        Branch { name: "sobolev_b", value: budget.w / (2.0 * budget.b * budget.lambda2 * vn) },
    ];
    let (delta, binding) = min_of(&branches);
    Ok(DeltaReport { delta, binding, branches, sector: l41 })
}

/// `ln(sinh(x)/x)` without overflow.
fn ln_sinhc(x: f64) -> f64 {
    if x < 20.0 {
        sinhc(x).ln()
    } else {
        x - (2.0 * x).ln() + (-(-2.0 * x).exp()).ln_1p()
    }
}

/// `ln ∫₀^r (sinh(κs)/κ)^{p} ds`, evaluated with the integrand rescaled by
/// `e^{−pκr}` so large radii do not overflow. For `κ = 0` this is `∫ s^p`.
pub fn ln_model_volume(r: f64, kappa: f64, p: f64) -> f64 {
    if r <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let shift = p * kappa * r;
    let integral = integrate(
        |s| {
            if s <= 0.0 {
                return if p == 0.0 { (-shift).exp() } else { 0.0 };
            }
            (p * (s.ln() + ln_sinhc(kappa * s)) - shift).exp()
        },
        0.0,
        r,
        QUADRATURE_TOL,
    );
    shift + integral.ln()
}

/// Packing count from volume comparison on a `CD(−Λ₃, N)` space:
/// `L = ceil(V(D + δ/2)/V(δ/2))`, `V(r) = ∫₀^r sinh(sqrt(Λ₃/(N−1))·s)^{N−1} ds`.
pub fn bishop_gromov_packing(d: f64, delta: f64, lambda3: f64, big_n: f64) -> Result<u64> {
    Ok(packing_ratio(d, delta, lambda3, big_n)?.1)
}

/// The unrounded ratio and the packing count.
pub fn packing_ratio(d: f64, delta: f64, lambda3: f64, big_n: f64) -> Result<(f64, u64)> {
    if !(delta > 0.0) || !(d > 0.0) {
        return precondition("D and delta must be positive");
    }
    if delta > d {
        return precondition(format!("delta = {delta} exceeds D = {d}"));
    }
    if !(lambda3 >= 0.0) || !(big_n > 1.0) {
        return precondition("Lambda3 must be nonnegative and N must exceed 1");
    }
    let p = big_n - 1.0;
    let kappa = (lambda3 / p).sqrt();
    // The common factor κ^{-p} cancels in the ratio.
    let ln_ratio = ln_model_volume(d + delta / 2.0, kappa, p) - ln_model_volume(delta / 2.0, kappa, p);
    let ratio = ln_ratio.exp();
    if !ratio.is_finite() || ratio >= u64::MAX as f64 {
        return Err(Error::Precondition(format!("packing ratio {ratio:e} does not fit in 64 bits")));
    }
    let nearest = ratio.round();
    let snapped = if (ratio - nearest).abs() <= INTEGER_SNAP * nearest { nearest } else { ratio };
    Ok((ratio, (snapped.ceil() as u64).max(1)))
}

fn serialize_biguint<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Constants chain of the group-order bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub c1: f64,
    pub c2: f64,
    pub delta0: f64,
    pub delta: f64,
    pub delta_binding: &'static str,
    pub delta_branches: Vec<Branch>,
    /// Unrounded volume ratio (absent when one ball already covers the diameter).
    pub packing_ratio: Option<f64>,
    pub l: u64,
    #[serde(serialize_with = "serialize_biguint")]
    pub l1: BigUint,
}

/// `δ → L → L₁ = L!`. When `δ ≥ D` a single ball suffices and `L = 1`.
pub fn finiteness_bound(budget: &GeometryBudget) -> Result<ConstantsReport> {
    let lambda3 = budget.lambda3.ok_or(Error::MissingInput("Lambda3"))?;
    let dr = angle_delta(budget)?;
    let (packing_ratio, l) = if dr.delta >= budget.d {
        (None, 1)
    } else {
        let (r, l) = packing_ratio(budget.d, dr.delta, lambda3, budget.big_n)?;
        (Some(r), l)
    };
    Ok(ConstantsReport {
        c1: dr.sector.c1,
        c2: dr.sector.c2,
        delta0: dr.sector.delta0,
        delta: dr.delta,
        delta_binding: dr.binding,
        delta_branches: dr.branches,
        packing_ratio,
        l,
        l1: pigeonhole_bound(l),
    })
}

/// Area of the unit `(n−1)`-sphere, `2π^{n/2}/Γ(n/2)`, with `Γ` exact at half-integers.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// `Γ(n/2)` for a positive integer `n`.
fn gamma_half(n: usize) -> f64 {
    if n % 2 == 0 {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        // Γ(k + 1/2) = √π · Π_{j=1}^{k} (j − 1/2)
        let k = n / 2;
        PI.sqrt() * (1..=k).map(|j| j as f64 - 0.5).product::<f64>()
    }
}

/// Threshold and smallness constant of the variant bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinedDeltaReport {
    pub delta: f64,
    pub delta_binding: &'static str,
    pub delta_branches: Vec<Branch>,
    pub epsilon: f64,
    /// `ω_{n−1} ∫₀^D (sinh(κs)/κ)^{n−1} ds`, `κ² = Λ₁/(n−1)`.
    pub volume_comparison: f64,
    /// `volume_comparison · E`, used as `V` in the formulas.
    pub measure_bound: f64,
    pub provenance: &'static str,
}

/// `δ = min{δ₁, 1/(4AΛ₂V^{2/n}), w/(4BΛ₂V^{2/n})}` and `ε = (C_G/4)·min{1/A, w/B}`.
///
/// `δ₁` and `C_G` are not computable from the budget and must be supplied.
pub fn refined_delta(budget: &GeometryBudget, delta1: Option<f64>, c_g: Option<f64>) -> Result<RefinedDeltaReport> {
    budget.validate()?;
    let delta1 = delta1.ok_or(Error::MissingInput("delta1"))?;
    let c_g = c_g.ok_or(Error::MissingInput("C_G"))?;
    let e = budget.e.ok_or(Error::MissingInput("E"))?;
    if !(delta1 > 0.0) || !(c_g > 0.0) {
        return precondition("delta1 and C_G must be positive");
    }
    let p = (budget.n - 1) as f64;
    let kappa = (budget.lambda1 / p).sqrt();
    let volume_comparison = unit_sphere_area(budget.n) * ln_model_volume(budget.d, kappa, p).exp();
    let measure_bound = volume_comparison * e;
    let vn = measure_bound.powf(2.0 / budget.n as f64);
    let branches = vec![
        Branch { name: "delta1", value: delta1 },
        Branch { name: "sobolev_a", value: 1.0 / (4.0 * budget.a * budget.lambda2 * vn) },
        Branch { name: "sobolev_b", value: budget.w / (4.0 * budget.b * budget.lambda2 * vn) },
    ];
    let (delta, binding) = min_of(&branches);
    let epsilon = c_g / 4.0 * (1.0 / budget.a).min(budget.w / budget.b);
    Ok(RefinedDeltaReport {
        delta,
        delta_binding: binding,
        delta_branches: branches,
        epsilon,
        volume_comparison,
        measure_bound,
        provenance: "delta1 and C_G are user-supplied: they come from compactness arguments and are not computable from the budget; V is read as the volume comparison bound times E",
    })
}

/// Result of [`smallness_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallnessReport {
    /// `(Σ m_i (θ_i + w)_+^{n/2})^{2/n}`.
    pub norm: f64,
    /// `min(1/(f·A), w/(f·B))`.
    pub threshold: f64,
    pub margin: f64,
    pub passed: bool,
}

/// Compares the discrete `L^{n/2}(m)` norm of `(θ + w)_+` with `min(1/(fA), w/(fB))`,
/// `f ∈ {2, 4}`.
pub fn smallness_check(
    theta_field: &[f64],
    space: &FiniteMMS,
    w: f64,
    a: f64,
    b: f64,
    n: usize,
    factor: u32,
) -> Result<SmallnessReport> {
    if theta_field.len() != space.n() {
        return precondition("theta field length does not match the space");
    }
    if factor != 2 && factor != 4 {
        return precondition("factor must be 2 or 4");
    }
    if n == 0 || !(a > 0.0) || !(b > 0.0) {
        return precondition("n, A and B must be positive");
    }
    let q = n as f64 / 2.0;
    let sum = neumaier_sum(
        theta_field
            .iter()
            .zip(space.weight())
            .map(|(&th, &m)| m * (th + w).max(0.0).powf(q)),
    );
    let norm = sum.powf(1.0 / q);
    let f = factor as f64;
    let threshold = (1.0 / (f * a)).min(w / (f * b));
    Ok(SmallnessReport { norm, threshold, margin: threshold - norm, passed: norm < threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

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
        let c = sector_constants(3, 1.0, 10.0).unwrap();
        assert_eq!((c.c1, c.c2, c.delta0), (8.0, 1.0, PI / 2.0));
        let c = sector_constants(2, 1.0, 0.1).unwrap();
        assert_eq!(c.c1, 4.0);
        assert_relative_eq!(c.c2, 0.5f64.sqrt());
        assert_eq!(c.delta0, 0.05);
        assert!(sector_constants(1, 1.0, 1.0).is_err());
        assert_eq!(sector_constants(3, 1e-300, 0.4).unwrap().delta0, 0.2);
    }

    #[test]
    fn angle_delta_fixture() {
        let r = angle_delta(&fixture()).unwrap();
        assert_relative_eq!(r.delta, 0.25f64.atan(), epsilon = 1e-15);
        assert_eq!(r.binding, "arctan");
    }

    #[test]
    fn flat_packing_limit() {
        assert_eq!(bishop_gromov_packing(1.0, 1.0, 1e-12, 3.0).unwrap(), 27);
        assert!(bishop_gromov_packing(1.0, 2.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn variant_threshold_examples() {
        let r = refined_delta(&GeometryBudget { w: 2.0, ..fixture() }, Some(1e-9), Some(4.0)).unwrap();
        assert_eq!(r.delta, 1e-9);
        assert_eq!(r.epsilon, 1.0);
        assert!(matches!(refined_delta(&fixture(), None, Some(1.0)), Err(Error::MissingInput("delta1"))));
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area(2), 2.0 * PI, epsilon = 1e-15);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI, epsilon = 1e-14);
    }
}
