//! Finite signed measures ν on ℝ × Δ built from atoms and piecewise-constant
//! densities, their marginals, and the tail and integrability constants the
//! series bounds need.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::TimeWindow;
use crate::numerics::rule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SpatialPart {
    /// δ_a
    Atom(f64),
    /// Σ values[i]·1_{[breakpoints[i], breakpoints[i+1])}
    Density { breakpoints: Vec<f64>, values: Vec<f64> },
}

/// Piecewise-constant, nonnegative density in time; zero off its pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalDensity {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureComponent {
    pub coefficient: f64,
    pub spatial: SpatialPart,
    pub temporal: TemporalDensity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedMeasure {
    pub components: Vec<MeasureComponent>,
    pub window: TimeWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    /// |ν|_x(ℝ) = |ν|(ℝ × Δ)
    pub nu_x_total: f64,
    /// ess sup of the density of |ν|_t
    pub nu_t_density_sup: f64,
    /// Gaussian tail exponent; `None` when the spatial support is compact,
    /// in which case every β > 0 is admissible.
    pub gaussian_tail_beta: Option<f64>,
    /// Spatial support radius.
    pub tail_radius: f64,
}

fn check_pieces(what: &str, breakpoints: &[f64], values: &[f64]) -> Result<()> {
    if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
        return Err(Error::InvalidMeasure(format!(
            "{what}: {} breakpoints need {} values, got {}",
            breakpoints.len(),
            breakpoints.len().saturating_sub(1),
            values.len()
        )));
    }
    if breakpoints.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::InvalidMeasure(format!("{what}: non-finite entry")));
    }
    if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidMeasure(format!(
            "{what}: breakpoints must be strictly increasing"
        )));
    }
    if values.iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidMeasure(format!(
            "{what}: values must be nonnegative (the sign lives in the coefficient)"
        )));
    }
    Ok(())
}

impl SpatialPart {
    pub fn mass(&self) -> f64 {
        match self {
            SpatialPart::Atom(_) => 1.0,
            SpatialPart::Density { breakpoints, values } => breakpoints
                .windows(2)
                .zip(values)
                .map(|(w, v)| v * (w[1] - w[0]))
                .sum(),
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            SpatialPart::Atom(a) => a.abs(),
            SpatialPart::Density { breakpoints, values } => breakpoints
                .windows(2)
                .zip(values)
                .filter(|(_, v)| **v > 0.0)
                .fold(0.0f64, |m, (w, _)| m.max(w[0].abs()).max(w[1].abs())),
        }
    }
}

impl TemporalDensity {
    pub fn constant(window: &TimeWindow, value: f64) -> Self {
        TemporalDensity {
            breakpoints: vec![window.t0, window.t],
            values: vec![value],
        }
    }

    pub fn mass(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| v * (w[1] - w[0]))
            .sum()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    pub fn value(&self, t: f64) -> f64 {
        let b = &self.breakpoints;
        if b.is_empty() || t < b[0] || t >= b[b.len() - 1] {
            return 0.0;
        }
        self.values[b.partition_point(|x| *x <= t) - 1]
    }
}

impl SignedMeasure {
    pub fn new(components: Vec<MeasureComponent>, window: TimeWindow) -> Result<Self> {
        let nu = SignedMeasure { components, window };
        nu.validate()?;
        Ok(nu)
    }

    pub fn zero(window: TimeWindow) -> Self {
        SignedMeasure {
            components: Vec::new(),
            window,
        }
    }

    /// c·δ_a(dx) ⊗ 1_Δ(t) dt
    pub fn single_atom(c: f64, a: f64, window: TimeWindow) -> Self {
        SignedMeasure {
            components: vec![MeasureComponent {
                coefficient: c,
                spatial: SpatialPart::Atom(a),
                temporal: TemporalDensity::constant(&window, 1.0),
            }],
            window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        TimeWindow::new(self.window.t0, self.window.t)?;
        for (i, comp) in self.components.iter().enumerate() {
            if !comp.coefficient.is_finite() {
                return Err(Error::InvalidMeasure(format!("component {i}: coefficient not finite")));
            }
            let tb = &comp.temporal.breakpoints;
            check_pieces(&format!("component {i} temporal"), tb, &comp.temporal.values)?;
            if tb[0] < self.window.t0 || tb[tb.len() - 1] > self.window.t {
                return Err(Error::InvalidMeasure(format!(
                    "component {i}: temporal density must lie inside [{}, {}]",
                    self.window.t0, self.window.t
                )));
            }
            match &comp.spatial {
                SpatialPart::Atom(a) if !a.is_finite() => {
                    return Err(Error::InvalidMeasure(format!("component {i}: atom not finite")))
                }
                SpatialPart::Density { breakpoints, values } => {
                    check_pieces(&format!("component {i} spatial"), breakpoints, values)?
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.coefficient == 0.0 || c.spatial.mass() == 0.0 || c.temporal.mass() == 0.0)
    }

    /// Multiply every coefficient by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut nu = self.clone();
        for c in &mut nu.components {
            c.coefficient *= s;
        }
        nu
    }

    /// |ν|(ℝ × Δ), component-wise (opposite-sign overlaps are not cancelled).
    pub fn total_variation(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.coefficient.abs() * c.spatial.mass() * c.temporal.mass())
            .sum()
    }

    pub fn support_radius(&self) -> f64 {
        self.components
            .iter()
            .filter(|c| c.coefficient != 0.0)
            .fold(0.0f64, |m, c| m.max(c.spatial.radius()))
    }
}

pub fn marginals(nu: &SignedMeasure) -> MarginalSummary {
    let mut cuts: Vec<f64> = nu
        .components
        .iter()
        .flat_map(|c| c.temporal.breakpoints.iter().copied())
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut sup = 0.0f64;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let d: f64 = nu
            .components
            .iter()
            .map(|c| c.coefficient.abs() * c.spatial.mass() * c.temporal.value(mid))
            .sum();
        sup = sup.max(d);
    }
    MarginalSummary {
        nu_x_total: nu.total_variation(),
        nu_t_density_sup: sup,
        gaussian_tail_beta: None,
        tail_radius: nu.support_radius(),
    }
}

/// Checks |ν|_x({|x| > r}) < exp(−βr²) for every r > `radius`.
///
/// Between consecutive atom radii the atomic tail is constant, so the
/// inequality is checked exactly at each plateau's right limit; density
/// contributions are checked on a 64-point grid inside each plateau.
pub fn check_condition_i(nu: &SignedMeasure, beta: f64, radius: f64) -> bool {
    if !(beta > 0.0) || !(radius > 0.0) || nu.validate().is_err() {
        return false;
    }
    // (radius, weight) atoms and (r_lo, r_hi, weight per unit r) slabs in r = |x|
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut slabs: Vec<(f64, f64, f64)> = Vec::new();
    for comp in &nu.components {
        let w = comp.coefficient.abs() * comp.temporal.mass();
        if w == 0.0 {
            continue;
        }
        match &comp.spatial {
            SpatialPart::Atom(a) => atoms.push((a.abs(), w)),
            SpatialPart::Density { breakpoints, values } => {
                for (b, v) in breakpoints.windows(2).zip(values) {
                    let (lo, hi) = (b[0], b[1]);
                    if lo < 0.0 && hi > 0.0 {
                        slabs.push((0.0, -lo, w * v));
                        slabs.push((0.0, hi, w * v));
                    } else {
                        slabs.push((lo.abs().min(hi.abs()), lo.abs().max(hi.abs()), w * v));
                    }
                }
            }
        }
    }
    let tail = |r: f64, strict_atoms_at: f64| {
        let a: f64 = atoms
            .iter()
            .filter(|(ra, _)| *ra >= strict_atoms_at && *ra > r)
            .map(|(_, w)| w)
            .sum();
        let d: f64 = slabs
            .iter()
            .map(|(lo, hi, w)| w * (hi - r.max(*lo)).max(0.0))
            .sum();
        a + d
    };
    let mut crit: Vec<f64> = atoms
        .iter()
        .map(|a| a.0)
        .chain(slabs.iter().flat_map(|s| [s.0, s.1]))
        .filter(|r| *r > radius)
        .collect();
    crit.push(radius);
    crit.sort_by(|a, b| a.partial_cmp(b).unwrap());
    crit.dedup();
    for w in crit.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // right limit: atoms at exactly `hi` still count
        let t_hi = tail(hi, hi) + atoms.iter().filter(|a| a.0 == hi).map(|a| a.1).sum::<f64>();
        if t_hi > (-beta * hi * hi).exp() {
            return false;
        }
        if !slabs.is_empty() {
            for j in 1..64 {
                let r = lo + (hi - lo) * j as f64 / 64.0;
                if tail(r, 0.0) >= (-beta * r * r).exp() {
                    return false;
                }
            }
        }
    }
    true
}

/// Q = (∫∫ |ν|(dx, dt)·exp(γ q x²))^{1/q}.
pub fn q_constant(nu: &SignedMeasure, gamma: f64, q: f64) -> Result<f64> {
    if !(q > 2.0) {
        return Err(Error::Domain(format!("q must exceed 2, got {q}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    let g = rule(32);
    let gq = gamma * q;
    let mut total = 0.0;
    for comp in &nu.components {
        let w = comp.coefficient.abs() * comp.temporal.mass();
        if w == 0.0 {
            continue;
        }
        let spatial = match &comp.spatial {
            SpatialPart::Atom(a) => (gq * a * a).exp(),
            SpatialPart::Density { breakpoints, values } => {
                let mut s = 0.0;
                for (b, v) in breakpoints.windows(2).zip(values) {
                    let xmax = b[0].abs().max(b[1].abs());
                    let m = ((2.0 * gq * xmax * (b[1] - b[0])).ceil() as usize).clamp(1, 10_000);
                    let h = (b[1] - b[0]) / m as f64;
                    for j in 0..m {
                        let lo = b[0] + j as f64 * h;
                        s += v * g
                            .integrate(lo, lo + h, |x| num_complex::Complex64::new((gq * x * x).exp(), 0.0))
                            .re;
                    }
                }
                s
            }
        };
        total += w * spatial;
    }
    let v = total.powf(1.0 / q);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("q_constant"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> TimeWindow {
        TimeWindow::new(0.0, 1.0).unwrap()
    }

    fn atom(c: f64, a: f64, temporal: TemporalDensity) -> MeasureComponent {
        MeasureComponent {
            coefficient: c,
            spatial: SpatialPart::Atom(a),
            temporal,
        }
    }

    #[test]
    fn marginal_examples() {
        let m = marginals(&SignedMeasure::single_atom(1.0, 0.0, unit()));
        assert_eq!((m.nu_x_total, m.nu_t_density_sup), (1.0, 1.0));
        let one = TemporalDensity::constant(&unit(), 1.0);
        let nu = SignedMeasure::new(vec![atom(1.0, 0.0, one.clone()), atom(-1.0, 1.0, one)], unit()).unwrap();
        assert_eq!(marginals(&nu).nu_x_total, 2.0);
        let half = TemporalDensity {
            breakpoints: vec![0.0, 0.5],
            values: vec![3.0],
        };
        let nu = SignedMeasure::new(vec![atom(2.0, 0.0, half)], unit()).unwrap();
        assert_eq!(marginals(&nu).nu_t_density_sup, 6.0);
    }

    #[test]
    fn condition_i_examples() {
        assert!(check_condition_i(&SignedMeasure::single_atom(1.0, 0.0, unit()), 3.0, 1e-3));
        let one = TemporalDensity::constant(&unit(), 1.0);
        let gauss: Vec<_> = (1..=8).map(|n| atom((-(n * n) as f64).exp(), n as f64, one.clone())).collect();
        assert!(check_condition_i(&SignedMeasure::new(gauss, unit()).unwrap(), 0.5, 1.0));
        let expo: Vec<_> = (1..=8).map(|n| atom((-(n as f64)).exp(), n as f64, one.clone())).collect();
        assert!(!check_condition_i(&SignedMeasure::new(expo, unit()).unwrap(), 0.5, 1.0));
    }

    #[test]
    fn q_examples() {
        let q = q_constant(&SignedMeasure::single_atom(1.0, 0.0, unit()), 0.3, 4.0).unwrap();
        assert_eq!(q, 1.0);
        let q = q_constant(&SignedMeasure::single_atom(1.0, 1.0, unit()), 0.1, 4.0).unwrap();
        assert!((q - 0.1f64.exp()).abs() < 1e-15);
        let one = TemporalDensity::constant(&unit(), 1.0);
        let nu = SignedMeasure::new(vec![atom(1.0, 0.0, one.clone()), atom(1.0, 1.0, one)], unit()).unwrap();
        let q = q_constant(&nu, 0.1, 4.0).unwrap();
        assert!((q - (1.0 + 0.4f64.exp()).powf(0.25)).abs() < 1e-15);
        assert!((q - 1.256_41).abs() < 1e-5);
        assert!(q_constant(&nu, 0.1, 2.0).is_err());
        assert!(q_constant(&nu, 0.0, 4.0).is_err());
    }

    #[test]
    fn density_q_matches_closed_form_for_flat_weight() {
        // γ tiny: ∫ e^{γq x²} ≈ mass
        let nu = SignedMeasure::new(
            vec![MeasureComponent {
                coefficient: -0.5,
                spatial: SpatialPart::Density {
                    breakpoints: vec![-1.0, 0.5, 2.0],
                    values: vec![1.0, 2.0],
                },
                temporal: TemporalDensity::constant(&unit(), 1.0),
            }],
            unit(),
        )
        .unwrap();
        // ∫_{-1}^{0.5} e^{x²} + 2∫_{0.5}^{2} e^{x²}, erfi-free reference by series
        let series = |x: f64| {
            let mut s = 0.0;
            let mut term = x;
            for n in 0..60 {
                s += term / (2 * n + 1) as f64;
                term *= x * x / (n + 1) as f64;
            }
            s
        };
        let exact = (series(0.5) - series(-1.0)) + 2.0 * (series(2.0) - series(0.5));
        let q = q_constant(&nu, 0.25, 4.0).unwrap();
        assert!((q.powi(4) - 0.5 * exact).abs() < 1e-12 * exact);
    }
}
