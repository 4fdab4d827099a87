//! One-dimensional quadrature helpers.

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Subdivides until the local error estimate drops below `tol` scaled by the
/// interval fraction, or `depth` bisections have been made.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = kronrod15(f, a, b);
        if err <= tol || depth == 0 {
            return value;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth - 1) + recurse(f, m, b, 0.5 * tol, depth - 1)
    }
    recurse(&f, a, b, tol, 48)
}

/// Mean value of `|tau|^alpha` along the straight segment from `a` to `b`.
///
/// Exact (closed form) for `alpha >= 0`.
pub fn mean_abs_power_linear(a: f64, b: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    let (fa, fb) = (a.abs(), b.abs());
    let e = alpha + 1.0;
    if a * b < 0.0 {
        return (fa.powf(e) + fb.powf(e)) / (e * (fa + fb));
    }
    let (lo, hi) = if fa <= fb { (fa, fb) } else { (fb, fa) };
    if hi == 0.0 {
        return 0.0;
    }
    let d = hi - lo;
    if d <= 1e-6 * hi {
        // (hi^e - lo^e) / (e d) by a short Taylor expansion around the midpoint
        let m = 0.5 * (hi + lo);
        let r = d / m;
        return m.powf(alpha) * (1.0 + alpha * (alpha - 1.0) * r * r / 24.0);
    }
    (hi.powf(e) - lo.powf(e)) / (e * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_endpoint_singularities() {
        assert!((integrate(|x| x * x, 0.0, 1.0, 1e-14) - 1.0 / 3.0).abs() < 1e-15);
        assert!((integrate(|x: f64| x.powf(1.5), 0.0, 1.0, 1e-14) - 0.4).abs() < 1e-13);
        assert!((integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-14) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn mean_power_matches_quadrature() {
        for &(a, b, al) in &[
            (0.3, 1.7, 1.5),
            (-0.4, 1.1, 2.0),
            (2.0, -0.5, 0.7),
            (1.0, 1.0 + 1e-9, 1.5),
            (0.0, 2.0, 3.0),
            (-1.2, -0.1, 2.5),
        ] {
            let q = integrate(|s| (a + s * (b - a)).abs().powf(al), 0.0, 1.0, 1e-15);
            let c = mean_abs_power_linear(a, b, al);
            assert!((q - c).abs() <= 1e-12 * c.max(1e-300), "{a} {b} {al}: {q} vs {c}");
        }
    }
}
