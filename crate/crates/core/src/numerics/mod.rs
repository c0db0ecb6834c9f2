//! Numeric primitives: branch-fixed complex helpers, Gaussian integrals,
//! quadratic extraction, Gauss–Legendre rules and log-Γ.

mod gamma;
mod gauss;
mod gaussian;
#[doc(hidden)]
pub mod oracle;
pub(crate) mod path;

pub use gamma::log_gamma;
pub use gauss::{gauss_legendre, GaussLegendre};
pub use gaussian::{
    complex_gaussian_integral, extract_quadratic, extract_quadratic_from_values,
    QuadraticCoefficients,
};

pub(crate) use gauss::{rule, IntegrationMatrix};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Principal square root computed as exp(½ Log z), argument in (−π/2, π/2].
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    (0.5 * z.ln()).exp()
}

pub(crate) fn finite(z: Complex64, what: &'static str) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Reduce an angle to (−π, π].
pub(crate) fn wrap_phase(a: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let mut r = a % tau;
    if r <= -std::f64::consts::PI {
        r += tau;
    } else if r > std::f64::consts::PI {
        r -= tau;
    }
    r
}
