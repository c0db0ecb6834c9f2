//! Closed-form Green's functions of the forced free particle and the forced
//! harmonic oscillator, and the checks they must pass.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    c, complex_gaussian_integral, extract_quadratic, finite, IntegrationMatrix, I,
};
use crate::testfn::{Forcing, Piece};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t0: f64,
    pub t: f64,
}

impl TimeWindow {
    pub fn new(t0: f64, t: f64) -> Result<Self> {
        if !(t > t0) || !t0.is_finite() || !t.is_finite() {
            return Err(Error::InvalidWindow { t0, t });
        }
        Ok(TimeWindow { t0, t })
    }

    pub fn len(&self) -> f64 {
        self.t - self.t0
    }

    pub fn contains(&self, s: f64) -> bool {
        s > self.t0 && s < self.t
    }
}

/// Window Δ = [t0, t], frequency k ≥ 0 and endpoints x0 → x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorProblem {
    pub window: TimeWindow,
    pub k: f64,
    pub x0: f64,
    pub x: f64,
}

impl OscillatorProblem {
    pub fn new(t0: f64, t: f64, k: f64, x0: f64, x: f64) -> Result<Self> {
        let p = OscillatorProblem {
            window: TimeWindow { t0, t },
            k,
            x0,
            x,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        TimeWindow::new(self.window.t0, self.window.t)?;
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(Error::Domain(format!("frequency k must be ≥ 0, got {}", self.k)));
        }
        if !self.x0.is_finite() || !self.x.is_finite() {
            return Err(Error::Domain("endpoints must be finite".into()));
        }
        check_frequency(self.k, self.window.len())
    }

    pub fn t0(&self) -> f64 {
        self.window.t0
    }

    pub fn t(&self) -> f64 {
        self.window.t
    }

    /// Same oscillator between other space-time endpoints.
    pub fn between(&self, x0: f64, t0: f64, x: f64, t: f64) -> Result<Self> {
        OscillatorProblem::new(t0, t, self.k, x0, x)
    }
}

pub(crate) fn check_frequency(k: f64, len: f64) -> Result<()> {
    let product = k * len;
    if product >= PI / 2.0 {
        return Err(Error::FrequencyOutOfRange { product });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Free,
    Harmonic,
}

/// A possibly complex time `z`, reached from the real time `anchor` along a
/// straight leg inside a single piece of the forcing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TimePoint {
    pub z: Complex64,
    pub anchor: f64,
}

impl TimePoint {
    pub fn real(t: f64) -> Self {
        TimePoint { z: c(t), anchor: t }
    }

    pub fn is_real(&self) -> bool {
        self.z.im == 0.0 && self.z.re == self.anchor
    }
}

const NODES: usize = 16;

/// Integrals of s along a path from u to v, with cosines and sines
/// anchored at the start (L) or at the end (R):
/// ca = ∫ s cos k(τ − u), cb = ∫ s cos k(v − τ), and
/// d_xy = ∫ dτ₁ s X_R(τ₁) ∫^{τ₁} dτ₂ s Y_L(τ₂).
/// Paths compose exactly, so a window can be assembled from pieces.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub span: Complex64,
    pub s2: Complex64,
    pub f1: Complex64,
    pub ca: Complex64,
    pub sa: Complex64,
    pub cb: Complex64,
    pub sb: Complex64,
    pub dcc: Complex64,
    pub dcs: Complex64,
    pub dsc: Complex64,
    pub dss: Complex64,
}

impl Moments {
    /// A straight segment within one polynomial piece; k|zb − za| ≲ 1.
    fn segment(p: &Piece, k: f64, za: Complex64, zb: Complex64) -> Moments {
        let im = IntegrationMatrix::shared(NODES);
        let g = &im.rule;
        let hw = (zb - za) * 0.5;
        let mut sv = [c(0.0); NODES];
        let mut cl = [c(0.0); NODES];
        let mut sl = [c(0.0); NODES];
        let mut m = Moments {
            span: zb - za,
            ..Moments::default()
        };
        for q in 0..NODES {
            let tau = za + hw * (1.0 + g.nodes[q]);
            sv[q] = p.at(tau);
            let (a, b) = (k * (tau - za), k * (zb - tau));
            cl[q] = sv[q] * a.cos();
            sl[q] = sv[q] * a.sin();
            let w = hw * g.weights[q];
            let (cr, sr) = (b.cos(), b.sin());
            m.s2 += w * sv[q] * sv[q];
            m.f1 += w * sv[q];
            m.ca += w * cl[q];
            m.sa += w * sl[q];
            m.cb += w * sv[q] * cr;
            m.sb += w * sv[q] * sr;
        }
        for q in 0..NODES {
            let (mut ic, mut is) = (c(0.0), c(0.0));
            for r in 0..NODES {
                ic += im.m[q][r] * cl[r];
                is += im.m[q][r] * sl[r];
            }
            let (ic, is) = (hw * ic, hw * is);
            let tau = za + hw * (1.0 + g.nodes[q]);
            let b = k * (zb - tau);
            let w = hw * g.weights[q] * sv[q];
            let (cr, sr) = (w * b.cos(), w * b.sin());
            m.dcc += cr * ic;
            m.dcs += cr * is;
            m.dsc += sr * ic;
            m.dss += sr * is;
        }
        m
    }

    /// The path self followed by `next`.
    pub fn then(&self, next: &Moments, k: f64) -> Moments {
        let (a, b) = (k * self.span, k * next.span);
        let (ca, sa) = (a.cos(), a.sin());
        let (cb, sb) = (b.cos(), b.sin());
        let (l, r) = (self, next);
        Moments {
            span: l.span + r.span,
            s2: l.s2 + r.s2,
            f1: l.f1 + r.f1,
            ca: l.ca + ca * r.ca - sa * r.sa,
            sa: l.sa + ca * r.sa + sa * r.ca,
            cb: r.cb + cb * l.cb - sb * l.sb,
            sb: r.sb + sb * l.cb + cb * l.sb,
            dcc: cb * l.dcc - sb * l.dsc + l.ca * r.cb + ca * r.dcc - sa * r.dcs,
            dcs: cb * l.dcs - sb * l.dss + l.sa * r.cb + ca * r.dcs + sa * r.dcc,
            dsc: sb * l.dcc + cb * l.dsc + l.ca * r.sb + ca * r.dsc - sa * r.dss,
            dss: sb * l.dcs + cb * l.dss + l.sa * r.sb + ca * r.dss + sa * r.dsc,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.span == c(0.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct WindowIntegrals {
    /// ∫ s²
    pub s2: Complex64,
    /// ∫ s
    pub f1: Complex64,
    /// ∫ s(τ) cos k(τ − t0)
    pub ia: Complex64,
    /// ∫ s(τ) cos k(t − τ)
    pub ib: Complex64,
    /// ∫ ds₁ s(s₁) cos k(t − s₁) ∫^{s₁} ds₂ s(s₂) cos k(s₂ − t0)
    pub d: Complex64,
    pub s_start: Complex64,
    pub s_end: Complex64,
}

impl WindowIntegrals {
    pub fn new(m: &Moments, s_start: Complex64, s_end: Complex64) -> Self {
        WindowIntegrals {
            s2: m.s2,
            f1: m.f1,
            ia: m.ca,
            ib: m.cb,
            d: m.dcc,
            s_start,
            s_end,
        }
    }
}

/// Moments of the path from `from` to `to`; the forcing is zero off `segs`.
fn path_moments(
    f: &Forcing,
    k: f64,
    from: Complex64,
    to: Complex64,
    segs: &[(Complex64, Complex64, usize)],
) -> Moments {
    let pieces = f.pieces();
    let mut out = Moments::default();
    let mut at = from;
    let gap = |out: Moments, span: Complex64| {
        if span == c(0.0) {
            return out;
        }
        let g = Moments {
            span,
            ..Moments::default()
        };
        if out.is_empty() {
            g
        } else {
            out.then(&g, k)
        }
    };
    for &(za, zb, idx) in segs {
        out = gap(out, za - at);
        at = zb;
        let span = zb - za;
        let m = ((k * span.norm()).ceil() as usize).max(1);
        for j in 0..m {
            let a = za + span * (j as f64 / m as f64);
            let b = za + span * ((j + 1) as f64 / m as f64);
            let seg = Moments::segment(&pieces[idx], k, a, b);
            out = if out.is_empty() { seg } else { out.then(&seg, k) };
        }
    }
    gap(out, to - at)
}

/// Moments of the real stretch [u, v] of the forcing.
pub(crate) fn real_moments(f: &Forcing, k: f64, u: f64, v: f64) -> Moments {
    let segs: Vec<_> = f
        .pieces()
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let (lo, hi) = (p.lo.max(u), p.hi.min(v));
            (hi > lo).then(|| (c(lo), c(hi), i))
        })
        .collect();
    path_moments(f, k, c(u), c(v), &segs)
}

/// Moments of the straight leg from a complex point to its real anchor,
/// plus the value of the forcing at the point. The anchor's right piece
/// supplies the polynomial.
pub(crate) fn leg_moments(f: &Forcing, k: f64, u: TimePoint) -> (Moments, Complex64) {
    match f.piece_right(u.anchor) {
        Some(i) if !u.is_real() => (
            path_moments(f, k, u.z, c(u.anchor), &[(u.z, c(u.anchor), i)]),
            f.pieces()[i].at(u.z),
        ),
        _ => (Moments::default(), f.value(u.anchor)),
    }
}

pub(crate) fn window_integrals(f: &Forcing, k: f64, u: TimePoint, v: TimePoint) -> WindowIntegrals {
    if f.is_zero() {
        return WindowIntegrals::default();
    }
    let pieces = f.pieces();
    let s_start = if u.is_real() {
        f.value(u.anchor)
    } else {
        f.piece_right(u.anchor).map_or(c(0.0), |i| pieces[i].at(u.z))
    };
    let s_end = if v.is_real() {
        f.value(v.anchor)
    } else {
        f.piece_left(v.anchor).map_or(c(0.0), |i| pieces[i].at(v.z))
    };

    let mut segs: Vec<(Complex64, Complex64, usize)> = Vec::new();
    if !u.is_real() {
        if let Some(i) = f.piece_right(u.anchor) {
            segs.push((u.z, c(u.anchor), i));
        }
    }
    for (i, p) in pieces.iter().enumerate() {
        let lo = p.lo.max(u.anchor);
        let hi = p.hi.min(v.anchor);
        if hi > lo {
            segs.push((c(lo), c(hi), i));
        }
    }
    if !v.is_real() {
        if let Some(i) = f.piece_left(v.anchor) {
            segs.push((c(v.anchor), v.z, i));
        }
    }
    WindowIntegrals::new(&path_moments(f, k, u.z, v.z, &segs), s_start, s_end)
}

/// log K(x, v | x0, u) for k ≥ 0 (k = 0 is the free particle).
pub(crate) fn log_kernel_tp(
    k: f64,
    x: f64,
    v: TimePoint,
    x0: f64,
    u: TimePoint,
    f: &Forcing,
) -> Complex64 {
    let w = window_integrals(f, k, u, v);
    log_kernel_from(k, x, x0, v.z - u.z, &w)
}

pub(crate) fn log_kernel_from(k: f64, x: f64, x0: f64, tt: Complex64, w: &WindowIntegrals) -> Complex64 {
    let gauge = x0 * w.s_start - x * w.s_end;
    if k == 0.0 {
        let pref = -0.5 * (2.0 * PI * I * tt).ln();
        let a = w.f1 + (x - x0);
        let phase = -0.5 * w.s2 + a * a / (2.0 * tt) + gauge;
        pref + I * phase
    } else {
        let kt = k * tt;
        let sin = kt.sin();
        let pref = 0.5 * (k / (2.0 * PI * I * sin)).ln();
        let dx = x - x0;
        let bracket = dx * dx + 2.0 * x * w.ia - 2.0 * x0 * w.ib + 2.0 * w.d;
        let phase = -0.5 * w.s2 + k / (2.0 * sin) * bracket
            - (x0 * x0 + x * x) * (0.5 * k) * (0.5 * kt).tan()
            + gauge;
        pref + I * phase
    }
}

/// log K₀^(f)(x,t|x0,t0) on real times.
pub fn log_free_kernel(x: f64, t: f64, x0: f64, t0: f64, f: &Forcing) -> Result<Complex64> {
    TimeWindow::new(t0, t)?;
    finite(
        log_kernel_tp(0.0, x, TimePoint::real(t), x0, TimePoint::real(t0), f),
        "free kernel",
    )
}

/// Free-particle Green's function with source ḟ(t)x.
pub fn free_kernel(x: f64, t: f64, x0: f64, t0: f64, f: &Forcing) -> Result<Complex64> {
    Ok(log_free_kernel(x, t, x0, t0, f)?.exp())
}

/// log K_h^(f)(x,t|x0,t0); continuous in every argument.
pub fn log_harmonic_kernel(p: &OscillatorProblem, f: &Forcing) -> Result<Complex64> {
    p.validate()?;
    finite(
        log_kernel_tp(
            p.k,
            p.x,
            TimePoint::real(p.t()),
            p.x0,
            TimePoint::real(p.t0()),
            f,
        ),
        "harmonic kernel",
    )
}

/// Forced harmonic-oscillator Green's function, potential ½k²x² + ḟ(t)x.
pub fn harmonic_kernel(p: &OscillatorProblem, f: &Forcing) -> Result<Complex64> {
    Ok(log_harmonic_kernel(p, f)?.exp())
}

fn kernel_of(kind: KernelKind, p: &OscillatorProblem, f: &Forcing) -> Result<Complex64> {
    match kind {
        KernelKind::Free => free_kernel(p.x, p.t(), p.x0, p.t0(), f),
        KernelKind::Harmonic => harmonic_kernel(p, f),
    }
}

/// Max over `grid` of |(i∂t + ½∂x² − ḟx − ½k²x²)K| / |K| by central
/// differences (second order in t, fourth order in x).
///
/// Grid points are (x, t) pairs with t inside the window, at least 10h
/// after t0 and h before its end.
pub fn schrodinger_residual(
    kind: KernelKind,
    p: &OscillatorProblem,
    f: &Forcing,
    h: f64,
    grid: &[(f64, f64)],
) -> Result<f64> {
    p.validate()?;
    if !(h > 0.0) {
        return Err(Error::Domain("grid spacing must be positive".into()));
    }
    let k = match kind {
        KernelKind::Free => 0.0,
        KernelKind::Harmonic => p.k,
    };
    let mut worst = 0.0f64;
    for &(x, t) in grid {
        if t < p.t0() + 10.0 * h || t > p.t() - h {
            return Err(Error::Domain(format!(
                "residual point t = {t} must lie in [t0 + 10h, t − h]"
            )));
        }
        let at = |xx: f64, tt: f64| {
            let q = OscillatorProblem {
                window: TimeWindow { t0: p.t0(), t: tt },
                k: p.k,
                x0: p.x0,
                x: xx,
            };
            kernel_of(kind, &q, f)
        };
        let k0 = at(x, t)?;
        let dt = (at(x, t + h)? - at(x, t - h)?) / (2.0 * h);
        let dxx = (-at(x + 2.0 * h, t)? + 16.0 * at(x + h, t)? - 30.0 * k0 + 16.0 * at(x - h, t)?
            - at(x - 2.0 * h, t)?)
            / (12.0 * h * h);
        let r = I * dt + 0.5 * dxx - f.derivative(t) * x * k0 - 0.5 * k * k * x * x * k0;
        worst = worst.max(r.norm() / k0.norm());
    }
    Ok(worst)
}

/// |∫ K(x,t|y,s)K(y,s|x0,t0) dy − K(x,t|x0,t0)| / |K(x,t|x0,t0)|, with the
/// y-integral done in closed form.
pub fn chapman_kolmogorov_defect(p: &OscillatorProblem, f: &Forcing, s: f64) -> Result<f64> {
    p.validate()?;
    if !p.window.contains(s) {
        return Err(Error::Domain(format!(
            "split time {s} must lie strictly inside [{}, {}]",
            p.t0(),
            p.t()
        )));
    }
    let log_pair = |y: f64| {
        Ok(log_kernel_tp(p.k, p.x, TimePoint::real(p.t()), y, TimePoint::real(s), f)
            + log_kernel_tp(p.k, y, TimePoint::real(s), p.x0, TimePoint::real(p.t0()), f))
    };
    let q = extract_quadratic(log_pair, [-1.0, 0.0, 1.0])?.fresnel_limit();
    let conv = complex_gaussian_integral(&q)?;
    let direct = harmonic_kernel(p, f)?;
    Ok((conv - direct).norm() / direct.norm())
}

/// |K_h^(f+λ1_{[lo,hi)}) − K_h^(f)| / |K_h^(f)|; requires [t0, t] ⊂ [lo, hi).
pub fn lemma42_defect(p: &OscillatorProblem, f: &Forcing, lo: f64, hi: f64, lambda: f64) -> Result<f64> {
    p.validate()?;
    if !(lo <= p.t0() && p.t() < hi) {
        return Err(Error::WindowNotContained {
            t0: p.t0(),
            t: p.t(),
            lo,
            hi,
        });
    }
    let shifted = f.with_indicator(lo, hi, c(lambda));
    let a = harmonic_kernel(p, &shifted)?;
    let b = harmonic_kernel(p, f)?;
    Ok((a - b).norm() / b.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::TestFunction;

    fn close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol * b.norm().max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn free_examples() {
        let z = Forcing::zero();
        close(free_kernel(0.0, 1.0, 0.0, 0.0, &z).unwrap(), Complex64::new(0.282_094_791_773_878_1, -0.282_094_791_773_878_1), 1e-14);
        let v = free_kernel(1.0, 1.0, 0.0, 0.0, &z).unwrap();
        let expect = (2.0 * PI).sqrt().recip() * Complex64::new(0.0, 0.5 - PI / 4.0).exp();
        close(v, expect, 1e-14);
        let v = free_kernel(0.0, 2.0, 0.0, 0.0, &z).unwrap();
        assert!((v.norm() - (4.0 * PI).sqrt().recip()).abs() < 1e-15);
        assert!((v.arg() + PI / 4.0).abs() < 1e-14);
        assert!(free_kernel(0.0, 0.0, 0.0, 0.0, &z).is_err());
    }

    #[test]
    fn mehler_examples() {
        let z = Forcing::zero();
        let p = OscillatorProblem::new(0.0, PI / 4.0, 1.0, 0.0, 0.0).unwrap();
        let m = (1.0 / (2.0 * PI * (PI / 4.0).sin())).sqrt();
        close(harmonic_kernel(&p, &z).unwrap(), m * Complex64::new(0.0, -PI / 4.0).exp(), 1e-14);
        let p = OscillatorProblem::new(0.0, PI / 4.0, 1.0, 0.0, 1.0).unwrap();
        let v = harmonic_kernel(&p, &z).unwrap();
        assert!((v.norm() - (1.0 / (2.0 * PI * (PI / 4.0).sin())).sqrt()).abs() < 1e-15);
        assert!((v.norm() - 0.474_425_0).abs() < 1e-7);
        assert!((v.arg() - (-PI / 4.0 + 0.5)).abs() < 1e-14);
        assert!(matches!(
            OscillatorProblem::new(0.0, 1.0, 2.0, 0.0, 0.0),
            Err(Error::FrequencyOutOfRange { .. })
        ));
    }

    #[test]
    fn moments_compose_across_a_split() {
        let f = cubic();
        let k = 0.9;
        let whole = real_moments(&f, k, 0.0, 0.6);
        let split = real_moments(&f, k, 0.0, 0.25).then(&real_moments(&f, k, 0.25, 0.6), k);
        for (a, b) in [
            (whole.ca, split.ca),
            (whole.sa, split.sa),
            (whole.cb, split.cb),
            (whole.sb, split.sb),
            (whole.dcc, split.dcc),
            (whole.dcs, split.dcs),
            (whole.dsc, split.dsc),
            (whole.dss, split.dss),
        ] {
            assert!((a - b).norm() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn window_integrals_match_direct_quadrature() {
        let f = TestFunction::bump().forcing();
        let k = 0.7;
        let (t0, t) = (0.1, 0.9);
        let w = window_integrals(&f, k, TimePoint::real(t0), TimePoint::real(t));
        let fv = |s: f64| f.value(s).re;
        let one = |g: &dyn Fn(f64) -> f64| {
            crate::numerics::oracle::adaptive(|s| c(g(s)), t0, t, 1e-15, 1e-15, 1000).re
        };
        assert!((w.s2.re - one(&|s| fv(s) * fv(s))).abs() < 1e-14);
        assert!((w.ia.re - one(&|s| fv(s) * (k * (s - t0)).cos())).abs() < 1e-14);
        assert!((w.ib.re - one(&|s| fv(s) * (k * (t - s)).cos())).abs() < 1e-14);
        let inner = |s1: f64| {
            crate::numerics::oracle::adaptive(
                |s2| c(fv(s2) * (k * (s2 - t0)).cos()),
                t0,
                s1,
                1e-16,
                1e-15,
                1000,
            )
            .re
        };
        let d = one(&|s1| fv(s1) * (k * (t - s1)).cos() * inner(s1));
        assert!((w.d.re - d).abs() < 1e-13, "{} vs {d}", w.d.re);
    }

    #[test]
    fn complex_time_paths_agree() {
        // moving the end off the axis and back along a leg is path independent
        let f = TestFunction::bump().forcing();
        let k = 0.8;
        let z = Complex64::new(0.6, -0.05);
        let a = log_kernel_tp(k, 0.3, TimePoint { z, anchor: 0.55 }, -0.2, TimePoint::real(0.1), &f);
        let b = log_kernel_tp(k, 0.3, TimePoint { z, anchor: 0.65 }, -0.2, TimePoint::real(0.1), &f);
        assert!((a - b).norm() < 1e-13);
    }

    fn cubic() -> Forcing {
        TestFunction::from_hermite(&[-0.2, 0.3, 0.8, 1.4], &[0.0, 0.7, -0.4, 0.0], &[0.5, -1.0, 0.8, -0.3])
            .unwrap()
            .forcing()
    }

    #[test]
    fn schrodinger_examples() {
        let z = Forcing::zero();
        let grid = [(0.3, 0.5), (-0.4, 0.9), (1.1, 0.65)];
        let p = OscillatorProblem::new(0.0, 1.0, 1.0, 0.2, 0.0).unwrap();
        assert!(schrodinger_residual(KernelKind::Free, &p, &z, 1e-3, &grid).unwrap() < 1e-4);
        assert!(schrodinger_residual(KernelKind::Harmonic, &p, &z, 1e-3, &grid).unwrap() < 1e-4);
        let p = OscillatorProblem::new(0.0, 1.0, 0.5, 0.2, 0.0).unwrap();
        let r1 = schrodinger_residual(KernelKind::Harmonic, &p, &cubic(), 1e-3, &grid).unwrap();
        let r2 = schrodinger_residual(KernelKind::Harmonic, &p, &cubic(), 5e-4, &grid).unwrap();
        assert!(r1 < 1e-3, "{r1}");
        assert!((r1 / r2).log2() > 1.9, "{r1} {r2}");
    }

    #[test]
    fn semigroup_examples() {
        let z = Forcing::zero();
        let p = OscillatorProblem::new(0.0, 1.0, 0.0, 0.3, -0.5).unwrap();
        assert!(chapman_kolmogorov_defect(&p, &z, 0.37).unwrap() < 1e-10);
        let p = OscillatorProblem::new(0.1, 0.7, 1.0, 0.3, -0.5).unwrap();
        assert!(chapman_kolmogorov_defect(&p, &z, 0.35).unwrap() < 1e-10);
        let d = chapman_kolmogorov_defect(&p, &cubic(), 0.35).unwrap();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn gauge_shift_examples() {
        let z = Forcing::zero();
        let p = OscillatorProblem::new(0.0, 0.5, 1.0, 0.3, -0.2).unwrap();
        assert_eq!(lemma42_defect(&p, &cubic(), -0.1, 0.6, 0.0).unwrap(), 0.0);
        assert!(lemma42_defect(&p, &z, -0.1, 0.6, 3.0).unwrap() < 1e-10);
        let p = OscillatorProblem::new(0.0, 0.5, 0.3, 0.3, -0.2).unwrap();
        assert!(lemma42_defect(&p, &cubic(), -0.1, 0.6, -2.0).unwrap() < 1e-10);
        assert!(matches!(
            lemma42_defect(&p, &cubic(), -0.1, 0.5, 1.0),
            Err(Error::WindowNotContained { .. })
        ));
    }
}
