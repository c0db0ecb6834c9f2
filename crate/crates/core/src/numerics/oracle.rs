//! Slow, general-purpose quadratures kept only as cross-checks for the
//! closed forms and structured rules used elsewhere.

use num_complex::Complex64;

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss–Kronrod (7/15) with a global error target.
pub fn adaptive<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Complex64 {
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: Complex64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) || parts.len() >= max_intervals {
            return total;
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Tanh–sinh quadrature on [a, b]; tolerates integrable endpoint
/// singularities. `f` receives (x, distance to a, distance to b) so that
/// singular factors can be evaluated without cancellation.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(mut f: F, a: f64, b: f64, levels: usize) -> f64 {
    let half = 0.5 * (b - a);
    let pi2 = std::f64::consts::FRAC_PI_2;
    let mut h = 1.0;
    let mut sum = 0.0;
    let tmax = 6.5;
    let mut eval = |t: f64| {
        let s = pi2 * t.sinh();
        let ch = s.cosh();
        let w = pi2 * t.cosh() / (ch * ch);
        // distance from the nearer end: half·(1 − tanh|s|) = half·e^{−|s|}/cosh s
        let e = (-s.abs()).exp() / ch;
        let (da, db) = if s < 0.0 {
            (half * e, 2.0 * half - half * e)
        } else {
            (2.0 * half - half * e, half * e)
        };
        if da <= 0.0 || db <= 0.0 {
            return 0.0;
        }
        let x = if s < 0.0 { a + da } else { b - db };
        w * f(x, da, db)
    };
    sum += eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut result = sum * h * half;
    for _ in 1..levels {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        result = sum * h * half;
    }
    result
}

/// ∫ exp((a2 − ε)u² + a1 u + a0) du by Gauss panels whose width follows the
/// local oscillation rate; needs Re(a2) − ε < 0.
pub fn damped_gaussian(q: &super::QuadraticCoefficients, eps: f64) -> Complex64 {
    let b2 = q.a2 - eps;
    assert!(b2.re < 0.0, "damped Gaussian needs a decaying envelope");
    let gl = super::GaussLegendre::new(16);
    let peak = -q.a1.re / (2.0 * b2.re);
    let reach = (40.0 / -b2.re).sqrt();
    let scale = 0.25 / (-b2.re).sqrt();
    let (mut u, hi) = (peak - reach, peak + reach);
    let mut sum = Complex64::new(0.0, 0.0);
    while u < hi {
        let rate = (2.0 * b2.im * u + q.a1.im).abs();
        let w = (2.0 / (rate + 1.0)).min(scale).min(hi - u);
        sum += gl.integrate(u, u + w, |s| (b2 * s * s + q.a1 * s + q.a0).exp());
        u += w;
    }
    sum
}
