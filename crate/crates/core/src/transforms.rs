//! T- and S-transforms of the free and harmonic Feynman integrands as
//! ordinary complex functionals of the source f.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyson::eq11_constant;
use crate::error::{Error, Result};
use crate::kernels::{log_kernel_from, log_kernel_tp, window_integrals, OscillatorProblem, TimePoint};
use crate::numerics::{c, complex_gaussian_integral, extract_quadratic, finite, I};
use crate::testfn::{Forcing, TestFunction};

/// Interior pins (t_j, x_j) with t0 < t_1 < … < t_n < t.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PinConfiguration {
    pub pins: Vec<(f64, f64)>,
}

impl PinConfiguration {
    pub fn new(pins: Vec<(f64, f64)>) -> Self {
        PinConfiguration { pins }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pins.is_empty()
    }

    pub fn validate(&self, p: &OscillatorProblem) -> Result<()> {
        let mut prev = p.t0();
        for (j, &(tj, xj)) in self.pins.iter().enumerate() {
            if !tj.is_finite() || !xj.is_finite() {
                return Err(Error::InvalidPins(format!("pin {j} is not finite")));
            }
            if !(tj > prev) {
                return Err(Error::InvalidPins(format!(
                    "pin {j} at t = {tj} does not follow {prev}"
                )));
            }
            prev = tj;
        }
        if !(p.t() > prev) {
            return Err(Error::InvalidPins(format!(
                "last pin at t = {prev} is not before the window end {}",
                p.t()
            )));
        }
        Ok(())
    }

    /// Space-time points (t_j, x_j) for j = 0..=n+1, endpoints included.
    pub fn nodes(&self, p: &OscillatorProblem) -> Vec<(f64, f64)> {
        let mut v = Vec::with_capacity(self.pins.len() + 2);
        v.push((p.t0(), p.x0));
        v.extend(self.pins.iter().copied());
        v.push((p.t(), p.x));
        v
    }

    /// Lengths |Δ_j|, j = 1..=n+1.
    pub fn sub_windows(&self, p: &OscillatorProblem) -> Vec<f64> {
        self.nodes(p).windows(2).map(|w| w[1].0 - w[0].0).collect()
    }

    /// X = sup_j |x_j| over pins and endpoints.
    pub fn sup_position(&self, p: &OscillatorProblem) -> f64 {
        self.nodes(p).iter().fold(0.0f64, |m, n| m.max(n.1.abs()))
    }

    /// Pins outside the open spatial interval between the endpoints.
    pub fn spatial_order_warning(&self, p: &OscillatorProblem) -> Option<String> {
        let (lo, hi) = (p.x0.min(p.x), p.x0.max(p.x));
        let bad: Vec<usize> = self
            .pins
            .iter()
            .enumerate()
            .filter(|(_, &(_, xj))| !(xj > lo && xj < hi))
            .map(|(j, _)| j)
            .collect();
        (!bad.is_empty()).then(|| {
            format!("pins {bad:?} are not strictly between x0 = {} and x = {}", p.x0, p.x)
        })
    }
}

/// C(f) = exp(−½ ∫ f²) (bilinear, so complex f is allowed).
pub fn characteristic_functional(f: &Forcing) -> Complex64 {
    (-0.5 * f.sq_integral(f64::NEG_INFINITY, f64::INFINITY)).exp()
}

fn log_t_transform(k: f64, p: &OscillatorProblem, f: &Forcing) -> Complex64 {
    let (u, v) = (TimePoint::real(p.t0()), TimePoint::real(p.t()));
    let mut w = window_integrals(f, k, u, v);
    // the gauge phase of the kernel is exactly what the transform removes
    w.s_start = c(0.0);
    w.s_end = c(0.0);
    log_kernel_from(k, p.x, p.x0, c(p.window.len()), &w) - 0.5 * f.sq_integral_outside(p.t0(), p.t())
}

/// log TI_h(f); continuous in f, so usable for quadratic extraction.
pub fn log_t_transform_harmonic(p: &OscillatorProblem, f: &Forcing) -> Result<Complex64> {
    p.validate()?;
    finite(log_t_transform(p.k, p, f), "harmonic T-transform")
}

/// TI₀(f) of the free Feynman integrand. The frequency of `p` is ignored.
pub fn t_transform_free(p: &OscillatorProblem, f: &Forcing) -> Result<Complex64> {
    let q = OscillatorProblem { k: 0.0, ..*p };
    q.validate()?;
    Ok(finite(log_t_transform(0.0, &q, f), "free T-transform")?.exp())
}

/// TI_h(f) of the harmonic Feynman integrand.
pub fn t_transform_harmonic(p: &OscillatorProblem, f: &Forcing) -> Result<Complex64> {
    Ok(log_t_transform_harmonic(p, f)?.exp())
}

/// S-transform from a T-transform: S(f) = C(f)·T(−if).
pub fn s_from_t<F>(transform: F, f: &Forcing) -> Result<Complex64>
where
    F: FnOnce(&Forcing) -> Result<Complex64>,
{
    let t = transform(&f.scale(-I))?;
    Ok(characteristic_functional(f) * t)
}

/// S-transform of the Donsker delta δ(B(t) − a).
pub fn donsker_s(t: f64, a: f64, f: &Forcing) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::InvalidWindow { t0: 0.0, t });
    }
    let d = f.integral(0.0, t) - a;
    Ok((2.0 * PI * t).sqrt().recip() * (-d * d / (2.0 * t)).exp())
}

/// T-transform of the Donsker delta δ(B(t) − a), from the Gaussian
/// conditional law of ⟨ω, g⟩ given B(t) = a.
pub fn donsker_t(t: f64, a: f64, g: &Forcing) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::InvalidWindow { t0: 0.0, t });
    }
    let gg = g.integral(0.0, t);
    let norm2 = g.sq_integral(f64::NEG_INFINITY, f64::INFINITY);
    let e = -a * a / (2.0 * t) + I * gg * a / t - 0.5 * (norm2 - gg * gg / t);
    Ok((2.0 * PI * t).sqrt().recip() * e.exp())
}

/// log of the pinned transform; see [`pinned_t_transform`].
pub fn log_pinned_t_transform(
    p: &OscillatorProblem,
    pins: &PinConfiguration,
    f: &Forcing,
) -> Result<Complex64> {
    p.validate()?;
    pins.validate(p)?;
    let nodes = pins.nodes(p);
    let mut acc = -0.5 * f.sq_integral_outside(p.t0(), p.t())
        + I * (p.x * f.value(p.t()) - p.x0 * f.value(p.t0()));
    for w in nodes.windows(2) {
        let ((ta, xa), (tb, xb)) = (w[0], w[1]);
        acc += log_kernel_tp(p.k, xb, TimePoint::real(tb), xa, TimePoint::real(ta), f);
    }
    finite(acc, "pinned T-transform")
}

/// e^{−½|f_{Δᶜ}|²}·e^{i(x f(t) − x0 f(t0))}·Π_j K_h^(f)(x_j,t_j|x_{j−1},t_{j−1}).
pub fn pinned_t_transform(
    p: &OscillatorProblem,
    pins: &PinConfiguration,
    f: &Forcing,
) -> Result<Complex64> {
    Ok(log_pinned_t_transform(p, pins, f)?.exp())
}

/// Relative difference between the single-pin transform and
/// (2π)⁻¹∫ e^{−iλ(x1 − x0)}·TI_h(f + λ1_{[t0,t1)}) dλ, the λ-integral
/// done in closed form.
///
/// The phase uses x1 − x0: pinning x(t1) = x1 for a path started at x0
/// fixes ⟨ω, 1_{[t0,t1)}⟩ = x1 − x0.
pub fn product_formula_check(p: &OscillatorProblem, pin: (f64, f64), f: &Forcing) -> Result<f64> {
    let pins = PinConfiguration::new(vec![pin]);
    pins.validate(p)?;
    let (t1, x1) = pin;
    let log_integrand = |lambda: f64| {
        let g = f.with_indicator(p.t0(), t1, c(lambda));
        Ok(log_t_transform_harmonic(p, &g)? - I * lambda * (x1 - p.x0))
    };
    let q = extract_quadratic(log_integrand, [-1.0, 0.0, 1.0])?.fresnel_limit();
    let via_lambda = complex_gaussian_integral(&q)? / (2.0 * PI);
    let direct = pinned_t_transform(p, &pins, f)?;
    Ok((via_lambda - direct).norm() / direct.norm())
}

/// (lhs, rhs) of the growth bound for the pinned transform at z·f.
pub fn growth_bound_check(
    p: &OscillatorProblem,
    pins: &PinConfiguration,
    f: &TestFunction,
    z: Complex64,
    gamma: f64,
) -> Result<(f64, f64)> {
    let (lhs, log_rhs) = log_growth_bound_check(p, pins, f, z, gamma)?;
    Ok((lhs, log_rhs.exp()))
}

/// (lhs, ln rhs) of the growth bound; the rhs alone overflows for large
/// |z|·‖f‖.
pub fn log_growth_bound_check(
    p: &OscillatorProblem,
    pins: &PinConfiguration,
    f: &TestFunction,
    z: Complex64,
    gamma: f64,
) -> Result<(f64, f64)> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    let lhs = pinned_t_transform(p, pins, &f.scaled(z))?.norm();
    Ok((lhs, log_growth_bound_rhs(p, pins, f, z, gamma)))
}

fn log_growth_bound_rhs(
    p: &OscillatorProblem,
    pins: &PinConfiguration,
    f: &TestFunction,
    z: Complex64,
    gamma: f64,
) -> f64 {
    let len = p.window.len();
    let l = eq11_constant(p.k, len);
    let nf = f.norms(&p.window).triple_norm;
    let x = pins.sup_position(p);
    let log_prod: f64 = pins
        .sub_windows(p)
        .iter()
        .map(|d| -0.5 * (4.0 * d).ln())
        .sum();
    let growth = z.norm_sqr() * nf * nf * (0.5 + PI * len / 2.0 + l * l / (2.0 * gamma));
    log_prod + x * x * gamma + growth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{free_kernel, harmonic_kernel};

    fn cubic() -> TestFunction {
        TestFunction::from_hermite(&[-0.2, 0.3, 0.8, 1.4], &[0.0, 0.7, -0.4, 0.0], &[0.5, -1.0, 0.8, -0.3])
            .unwrap()
    }

    #[test]
    fn free_transform_examples() {
        let p = OscillatorProblem::new(0.0, 1.0, 0.0, 0.4, 0.4).unwrap();
        let v = t_transform_free(&p, &Forcing::zero()).unwrap();
        assert!((v - Complex64::new(0.282_094_791_773_878_1, -0.282_094_791_773_878_1)).norm() < 1e-14);
        // support outside the window: only the damping survives in the modulus
        let g = TestFunction::from_hermite(&[2.0, 2.5, 3.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0]).unwrap();
        let v = t_transform_free(&p, &g.forcing()).unwrap();
        let n = g.norms(&p.window);
        let expect = (2.0 * PI).sqrt().recip() * (-0.5 * n.l2_full * n.l2_full).exp();
        assert!((v.norm() - expect).abs() < 1e-15);
    }

    #[test]
    fn kernel_identities() {
        let f = cubic().forcing();
        let p = OscillatorProblem::new(0.1, 0.9, 0.0, 0.3, -0.6).unwrap();
        let k0 = free_kernel(p.x, p.t(), p.x0, p.t0(), &f).unwrap();
        let rhs = k0
            * (I * (p.x * f.value(p.t()) - p.x0 * f.value(p.t0()))).exp()
            * (-0.5 * f.sq_integral_outside(p.t0(), p.t())).exp();
        let t = t_transform_free(&p, &f).unwrap();
        assert!((t - rhs).norm() < 1e-12 * t.norm());
        let p = OscillatorProblem::new(0.1, 0.9, 1.2, 0.3, -0.6).unwrap();
        let kh = harmonic_kernel(&p, &f).unwrap();
        let rhs = kh
            * (I * (p.x * f.value(p.t()) - p.x0 * f.value(p.t0()))).exp()
            * (-0.5 * f.sq_integral_outside(p.t0(), p.t())).exp();
        let t = t_transform_harmonic(&p, &f).unwrap();
        assert!((t - rhs).norm() < 1e-12 * t.norm());
    }

    #[test]
    fn donsker_examples() {
        let z = Forcing::zero();
        assert!((donsker_s(1.0, 0.0, &z).unwrap().re - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((donsker_s(1.0, 1.0, &z).unwrap().re - 0.241_970_724_519_143_37).abs() < 1e-15);
        let f = cubic().forcing();
        let a = f.integral(0.0, 0.7).re;
        assert!((donsker_s(0.7, a, &f).unwrap().re - (2.0 * PI * 0.7).sqrt().recip()).abs() < 1e-15);
        let s = s_from_t(|g| donsker_t(0.7, 0.2, g), &f).unwrap();
        assert!((s - donsker_s(0.7, 0.2, &f).unwrap()).norm() < 1e-14);
        let two = Forcing::zero().with_indicator(0.0, 2.0, c(1.0));
        assert!((characteristic_functional(&two).re - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn product_formula_examples() {
        let z = Forcing::zero();
        let p = OscillatorProblem::new(0.0, 0.5, 1.0, 0.3, -0.2).unwrap();
        assert!(product_formula_check(&p, (0.2, 0.1), &z).unwrap() < 1e-8);
        let d = product_formula_check(&p, (0.2, 0.1), &cubic().forcing()).unwrap();
        assert!(d < 1e-8, "{d}");
        let p = OscillatorProblem::new(0.0, 0.5, 1e-7, 0.3, -0.2).unwrap();
        assert!(product_formula_check(&p, (0.2, 0.1), &z).unwrap() < 1e-8);
    }

    #[test]
    fn pinned_with_no_pins_is_the_transform() {
        let f = cubic().forcing();
        let p = OscillatorProblem::new(0.1, 0.9, 1.2, 0.3, -0.6).unwrap();
        let a = pinned_t_transform(&p, &PinConfiguration::empty(), &f).unwrap();
        let b = t_transform_harmonic(&p, &f).unwrap();
        assert!((a - b).norm() < 1e-13 * b.norm());
    }

    #[test]
    fn growth_bound_at_zero() {
        let p = OscillatorProblem::new(0.0, 1.0, 1.0, 0.3, -0.6).unwrap();
        let pins = PinConfiguration::new(vec![(0.4, 0.5)]);
        let (l, r) = growth_bound_check(&p, &pins, &TestFunction::zero(), c(0.0), 1.0).unwrap();
        assert!(l <= r);
    }
}
