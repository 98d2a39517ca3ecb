//! Small numerical helpers shared across modules.

/// Neumaier (improved Kahan) compensated sum.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `sin(x)/x`, continuous at 0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `sinh(x)/x`, continuous at 0.
pub fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// Adaptive Gauss–Kronrod (7/15) quadrature of `f` on `[a, b]`.
///
/// Subdivides until the Kronrod–Gauss difference on every panel is below
/// `rel_tol` times the running integral magnitude.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    const XK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    let panel = |lo: f64, hi: f64| -> (f64, f64) {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let fc = f(c);
        let mut k = WK[7] * fc;
        let mut g = WG[3] * fc;
        for i in 0..7 {
            let s = f(c - h * XK[i]) + f(c + h * XK[i]);
            k += WK[i] * s;
            if i % 2 == 1 {
                g += WG[i / 2] * s;
            }
        }
        (k * h, (k - g).abs() * h)
    };
    let mut stack = vec![(a, b, 0u32)];
    let mut total = Vec::new();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = panel(lo, hi);
        let scale = val.abs().max(f64::MIN_POSITIVE);
        if err <= rel_tol * scale * 1e-2 || depth >= 48 {
            total.push(val);
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    neumaier_sum(total)
}

/// Least-squares polynomial fit of `ys` against `xs`; returns the
/// coefficients (constant first) and the RMS residual.
pub fn polyfit(xs: &[f64], ys: &[f64], order: usize) -> Option<(Vec<f64>, f64)> {
    let m = order + 1;
    if xs.len() != ys.len() || xs.len() < m {
        return None;
    }
    // Scale abscissae into [-1, 1]-ish for conditioning, then map back.
    let scale = xs.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let a = nalgebra::DMatrix::from_fn(xs.len(), m, |i, j| (xs[i] / scale).powi(j as i32));
    let b = nalgebra::DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).ok()?;
    let resid = &a * &c - &b;
    let rms = (resid.norm_squared() / xs.len() as f64).sqrt();
    let coeffs = (0..m).map(|j| c[j] / scale.powi(j as i32)).collect();
    Some((coeffs, rms))
}

/// `e^{-x} I_k(x)` for `x ≥ 0` by the power series (intended for moderate `x`).
pub fn scaled_bessel_i(k: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    // log of the leading term (x/2)^k / k!
    let mut log_term = k as f64 * half.ln() - ln_factorial(k);
    let q = half * half;
    let mut terms = Vec::new();
    let mut j = 0u32;
    loop {
        let t = (log_term - x).exp();
        terms.push(t);
        j += 1;
        log_term += q.ln() - (j as f64).ln() - ((j + k) as f64).ln();
        if j as f64 > half && (log_term - x).exp() < 1e-18 * t.max(f64::MIN_POSITIVE) {
            break;
        }
        if j > 100_000 {
            break;
        }
    }
    neumaier_sum(terms)
}

fn ln_factorial(k: u32) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}
