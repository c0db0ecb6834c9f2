use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{principal_sqrt, wrap_phase};
use crate::error::{Error, Result};

/// Coefficients of exp(a2·u² + a1·u + a0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoefficients {
    pub a2: Complex64,
    pub a1: Complex64,
    pub a0: Complex64,
}

impl QuadraticCoefficients {
    pub fn new(a2: Complex64, a1: Complex64, a0: Complex64) -> Self {
        QuadraticCoefficients { a2, a1, a0 }
    }

    /// Drops a roundoff-sized real part of a2 from a coefficient set that
    /// is pure phase in exact arithmetic, so the integral is read as its
    /// damped limit.
    pub fn fresnel_limit(mut self) -> Self {
        if self.a2.re.abs() <= 1e-12 * self.a2.norm() {
            self.a2.re = 0.0;
        }
        self
    }

    pub fn exponent(&self, u: f64) -> Complex64 {
        (self.a2 * u + self.a1) * u + self.a0
    }
}

/// ∫ℝ exp(a2u² + a1u + a0) du = √(−π/a2)·exp(a0 − a1²/(4a2)).
///
/// For Re(a2) = 0 this is the ε → 0⁺ limit of the damped integral.
pub fn complex_gaussian_integral(q: &QuadraticCoefficients) -> Result<Complex64> {
    let QuadraticCoefficients { a2, a1, a0 } = *q;
    if a2.re > 0.0 {
        return Err(Error::DivergentIntegral(a2.re));
    }
    if a2.norm() == 0.0 {
        return Err(Error::DegenerateQuadratic);
    }
    let pref = principal_sqrt(-std::f64::consts::PI / a2);
    let v = pref * (a0 - a1 * a1 / (4.0 * a2)).exp();
    super::finite(v, "complex_gaussian_integral")
}

const CHECK_TOL: f64 = 1e-8;

fn fit(u: [f64; 3], l: [Complex64; 3]) -> QuadraticCoefficients {
    // Newton divided differences
    let d01 = (l[1] - l[0]) / (u[1] - u[0]);
    let d12 = (l[2] - l[1]) / (u[2] - u[1]);
    let a2 = (d12 - d01) / (u[2] - u[0]);
    let a1 = d01 - a2 * (u[0] + u[1]);
    let a0 = l[0] - (a2 * u[0] + a1) * u[0];
    QuadraticCoefficients { a2, a1, a0 }
}

fn check_point(u: [f64; 3]) -> f64 {
    0.5 * (u[0] + u[1])
}

fn verify(q: &QuadraticCoefficients, at: f64, log_value: Complex64) -> Result<()> {
    let mut d = q.exponent(at) - log_value;
    d.im = wrap_phase(d.im);
    let residual = (d.exp() - 1.0).norm();
    if residual.is_finite() && residual <= CHECK_TOL {
        Ok(())
    } else {
        Err(Error::NotQuadratic {
            residual,
            tolerance: CHECK_TOL,
        })
    }
}

fn validate_samples(u: [f64; 3]) -> Result<()> {
    if !(u[0] < u[1] && u[1] < u[2]) || u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "quadratic extraction needs three increasing finite samples".into(),
        ));
    }
    Ok(())
}

/// Recover (a2, a1, a0) from a log-amplitude that is exactly quadratic in u.
///
/// `log_eval` must return a branch-continuous logarithm (the kernels in this
/// crate produce their exponents directly). The fit is checked at a fourth
/// point between the first two samples.
pub fn extract_quadratic<F>(mut log_eval: F, u: [f64; 3]) -> Result<QuadraticCoefficients>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    validate_samples(u)?;
    let l = [log_eval(u[0])?, log_eval(u[1])?, log_eval(u[2])?];
    let q = fit(u, l);
    let at = check_point(u);
    verify(&q, at, log_eval(at)?)?;
    Ok(q)
}

/// Same as [`extract_quadratic`] for an evaluator returning plain values.
///
/// Logarithms are taken on the principal branch and unwrapped along the
/// samples so successive phases differ by at most π.
pub fn extract_quadratic_from_values<F>(mut eval: F, u: [f64; 3]) -> Result<QuadraticCoefficients>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    validate_samples(u)?;
    let mut l = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        let v = eval(u[i])?;
        if v.norm() == 0.0 || !v.norm().is_finite() {
            return Err(Error::NonFinite("extract_quadratic_from_values"));
        }
        l[i] = v.ln();
        if i > 0 {
            let jump = l[i].im - l[i - 1].im;
            l[i].im -= 2.0 * std::f64::consts::PI * (jump / (2.0 * std::f64::consts::PI)).round();
        }
    }
    let q = fit(u, l);
    let at = check_point(u);
    let v = eval(at)?;
    if v.norm() == 0.0 {
        return Err(Error::NonFinite("extract_quadratic_from_values"));
    }
    verify(&q, at, v.ln())?;
    Ok(q)
}
