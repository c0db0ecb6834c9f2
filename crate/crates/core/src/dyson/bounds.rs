use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::OscillatorProblem;
use crate::measures::{marginals, q_constant, SignedMeasure};
use crate::numerics::log_gamma;

/// L = π + (3π/4)k|Δ| + 2k|Δ| + (π/4)|Δ|(2 + k²|Δ|).
pub fn eq11_constant(k: f64, delta_len: f64) -> f64 {
    let kd = k * delta_len;
    PI + 0.75 * PI * kd + 2.0 * kd + 0.25 * PI * delta_len * (2.0 + k * kd)
}

/// ∫_{Λn} Π_{j=1}^{n+1} (4|t_j − t_{j−1}|)^{−α} dⁿt
/// = (Γ(1−α)/4^α)^{n+1} |Δ|^{n(1−α)−α} / Γ((n+1)(1−α)).
pub fn simplex_gamma_integral(n: usize, alpha: f64, delta_len: f64) -> Result<f64> {
    if n < 1 || !(alpha > 0.0 && alpha < 1.0) || !(delta_len > 0.0) {
        return Err(Error::Domain(format!(
            "simplex integral needs n ≥ 1, 0 < α < 1, |Δ| > 0 (got n={n}, α={alpha}, |Δ|={delta_len})"
        )));
    }
    let nf = n as f64;
    let b = 1.0 - alpha;
    let ln = (nf + 1.0) * (log_gamma(b)? - alpha * 4f64.ln())
        + (nf * b - alpha) * delta_len.ln()
        - log_gamma((nf + 1.0) * b)?;
    Ok(ln.exp())
}

/// Hölder exponents and constants entering the C_n bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub gamma: f64,
    pub q: f64,
    pub p: f64,
    /// the growth-bound constant L
    pub l_const: f64,
    /// Q = (∫∫|ν| e^{γq x²})^{1/q}
    pub q_const: f64,
}

impl BoundParams {
    pub const DEFAULT_Q: f64 = 4.0;

    pub fn new(nu: &SignedMeasure, problem: &OscillatorProblem, gamma: f64, q: f64) -> Result<Self> {
        if !(q > 2.0) || !q.is_finite() {
            return Err(Error::Domain(format!("q must exceed 2, got {q}")));
        }
        if !(gamma > 0.0) {
            return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
        }
        if let Some(beta) = marginals(nu).gaussian_tail_beta {
            if gamma * q >= beta {
                return Err(Error::TailNotCertifiable(format!(
                    "γq = {} is not below the tail exponent β = {beta}",
                    gamma * q
                )));
            }
        }
        let p = q / (q - 1.0);
        let q_const = q_constant(nu, gamma, q).map_err(|e| match e {
            Error::NonFinite(_) => Error::TailNotCertifiable("Q is not finite".into()),
            other => other,
        })?;
        Ok(BoundParams {
            gamma,
            q,
            p,
            l_const: eq11_constant(problem.k, problem.window.len()),
            q_const,
        })
    }

    /// q = 4 and γ = min(β/(2q), 1); β is unbounded for compact support.
    pub fn default_for(nu: &SignedMeasure, problem: &OscillatorProblem) -> Result<Self> {
        let q = Self::DEFAULT_Q;
        let gamma = match marginals(nu).gaussian_tail_beta {
            Some(beta) => (beta / (2.0 * q)).min(1.0),
            None => 1.0,
        };
        Self::new(nu, problem, gamma, q)
    }

    /// exp(‖f‖²(½ + π|Δ|/2 + L²/(2γ))) for a given ‖f‖.
    pub fn growth_factor(&self, problem: &OscillatorProblem, triple_norm: f64) -> f64 {
        let len = problem.window.len();
        (triple_norm * triple_norm * (0.5 + PI * len / 2.0 + self.l_const * self.l_const / (2.0 * self.gamma)))
            .exp()
    }
}

/// ln C_n; −∞ when the measure is zero and n ≥ 1.
pub fn log_tail_bound_cn(n: usize, nu: &SignedMeasure, problem: &OscillatorProblem, bp: &BoundParams) -> Result<f64> {
    let a = (2.0 - bp.p) / 2.0;
    let nf = n as f64;
    if !((nf + 1.0) * a > 0.0) {
        return Err(Error::Domain(format!(
            "(n+1)(2−p)/2 = {} must be positive",
            (nf + 1.0) * a
        )));
    }
    let nu_t = marginals(nu).nu_t_density_sup;
    let len = problem.window.len();
    let mut ln = bp.gamma * (problem.x0 * problem.x0 + problem.x * problem.x)
        + (nf + 1.0) / bp.p * log_gamma(a)?
        + (nf / bp.p - (nf + 1.0) / 2.0) * len.ln()
        - (nf + 1.0) * 2f64.ln()
        - log_gamma((nf + 1.0) * a)? / bp.p;
    if n > 0 {
        if bp.q_const == 0.0 || nu_t == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        ln += nf * bp.q_const.ln() + nf / bp.p * nu_t.ln();
    }
    Ok(ln)
}

/// The Hölder/Γ bound C_n dominating the n-th term at f ≡ 0.
pub fn tail_bound_cn(n: usize, nu: &SignedMeasure, problem: &OscillatorProblem, bp: &BoundParams) -> Result<f64> {
    Ok(log_tail_bound_cn(n, nu, problem, bp)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::TimeWindow;

    #[test]
    fn constant_examples() {
        assert!((eq11_constant(0.0, 1.0) - 1.5 * PI).abs() < 1e-15);
        assert!((eq11_constant(1.0, 1.0) - (2.0 + 2.5 * PI)).abs() < 1e-14);
    }

    #[test]
    fn simplex_examples() {
        assert!((simplex_gamma_integral(1, 0.5, 1.0).unwrap() - PI / 4.0).abs() < 1e-14);
        assert!((simplex_gamma_integral(2, 0.5, 1.0).unwrap() - PI / 4.0).abs() < 1e-14);
        assert!(simplex_gamma_integral(0, 0.5, 1.0).is_err());
        assert!(simplex_gamma_integral(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn c0_closed_form() {
        let w = TimeWindow::new(0.0, 0.5).unwrap();
        let nu = SignedMeasure::single_atom(0.2, 0.0, w);
        let p = OscillatorProblem::new(0.0, 0.5, 1.0, 0.3, -0.4).unwrap();
        let bp = BoundParams::default_for(&nu, &p).unwrap();
        assert!((bp.p - 4.0 / 3.0).abs() < 1e-15 && (1.0 / bp.p + 1.0 / bp.q - 1.0).abs() < 1e-12);
        let c0 = tail_bound_cn(0, &nu, &p, &bp).unwrap();
        let expect = (bp.gamma * (0.09 + 0.16)).exp() / (2.0 * 0.5f64.sqrt());
        assert!((c0 - expect).abs() < 1e-14 * expect);
    }
}
