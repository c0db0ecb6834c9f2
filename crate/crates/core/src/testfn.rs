//! Compactly supported piecewise-cubic test functions and the
//! (possibly complex, possibly discontinuous) forcings built from them.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::TimeWindow;
use crate::numerics::rule;

/// Real C¹ piecewise cubic, zero outside `[breakpoints[0], breakpoints[last]]`.
///
/// Piece `i` is `Σ_j coefficients[i][j]·(t − breakpoints[i])^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    breakpoints: Vec<f64>,
    coefficients: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBundle {
    pub sup_abs_f: f64,
    pub sup_abs_fprime: f64,
    pub l2_full: f64,
    pub l2_on_window: f64,
    pub l2_off_window: f64,
    pub triple_norm: f64,
}

fn horner(c: &[f64; 4], x: f64) -> f64 {
    ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
}

fn horner_d(c: &[f64; 4], x: f64) -> f64 {
    (3.0 * c[3] * x + 2.0 * c[2]) * x + c[1]
}

// ∫_0^x p(ξ)² dξ for a cubic p
fn sq_antiderivative(c: &[f64; 4], x: f64) -> f64 {
    let mut sq = [0.0; 7];
    for i in 0..4 {
        for j in 0..4 {
            sq[i + j] += c[i] * c[j];
        }
    }
    let mut acc = 0.0;
    for k in (0..7).rev() {
        acc = acc * x + sq[k] / (k as f64 + 1.0);
    }
    acc * x
}

impl TestFunction {
    pub fn zero() -> Self {
        TestFunction {
            breakpoints: Vec::new(),
            coefficients: Vec::new(),
        }
    }

    pub fn new(breakpoints: Vec<f64>, coefficients: Vec<[f64; 4]>) -> Result<Self> {
        if breakpoints.is_empty() && coefficients.is_empty() {
            return Ok(Self::zero());
        }
        if breakpoints.len() < 2 || coefficients.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidTestFunction(format!(
                "{} breakpoints need {} coefficient rows, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                coefficients.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || coefficients.iter().flatten().any(|c| !c.is_finite())
        {
            return Err(Error::InvalidTestFunction("non-finite input".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTestFunction(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        let f = TestFunction {
            breakpoints,
            coefficients,
        };
        let scale = f
            .coefficients
            .iter()
            .flatten()
            .fold(1.0f64, |m, c| m.max(c.abs()));
        let tol = 1e-12 * scale;
        let n = f.coefficients.len();
        let first = f.coefficients[0][0];
        let last = horner(&f.coefficients[n - 1], f.breakpoints[n] - f.breakpoints[n - 1]);
        if first.abs() > tol || last.abs() > tol {
            return Err(Error::InvalidTestFunction(format!(
                "must vanish at the support ends (values {first:.3e}, {last:.3e})"
            )));
        }
        for i in 1..n {
            let h = f.breakpoints[i] - f.breakpoints[i - 1];
            let (l, r) = (&f.coefficients[i - 1], &f.coefficients[i]);
            let dv = horner(l, h) - r[0];
            let dd = horner_d(l, h) - r[1];
            if dv.abs() > tol || dd.abs() > tol * (1.0 + 1.0 / h) {
                return Err(Error::InvalidTestFunction(format!(
                    "not C¹ at breakpoint {} (jumps {dv:.3e}, {dd:.3e})",
                    f.breakpoints[i]
                )));
            }
        }
        Ok(f)
    }

    /// Cubic Hermite interpolant through (nodes, values, slopes); the end
    /// values must be zero.
    pub fn from_hermite(nodes: &[f64], values: &[f64], slopes: &[f64]) -> Result<Self> {
        if nodes.len() != values.len() || nodes.len() != slopes.len() {
            return Err(Error::InvalidTestFunction("mismatched Hermite data".into()));
        }
        if nodes.len() < 2 {
            return Err(Error::InvalidTestFunction("need two Hermite nodes".into()));
        }
        let mut coefficients = Vec::with_capacity(nodes.len() - 1);
        for i in 0..nodes.len() - 1 {
            let h = nodes[i + 1] - nodes[i];
            let (y0, y1, d0, d1) = (values[i], values[i + 1], slopes[i], slopes[i + 1]);
            let c2 = (3.0 * (y1 - y0) / h - 2.0 * d0 - d1) / h;
            let c3 = (d0 + d1 - 2.0 * (y1 - y0) / h) / (h * h);
            coefficients.push([y0, d0, c2, c3]);
        }
        Self::new(nodes.to_vec(), coefficients)
    }

    /// Random Hermite cubic on `[lo, hi]` with `pieces` pieces and values
    /// and slopes drawn from [−amp, amp].
    pub fn random<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64, pieces: usize, amp: f64) -> Self {
        let pieces = pieces.max(1);
        let h = (hi - lo) / pieces as f64;
        let mut nodes: Vec<f64> = (0..=pieces).map(|i| lo + i as f64 * h).collect();
        for node in nodes.iter_mut().take(pieces).skip(1) {
            *node += rng.gen_range(-0.3..0.3) * h;
        }
        nodes[pieces] = hi;
        let mut values: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(-amp..amp)).collect();
        values[0] = 0.0;
        values[pieces] = 0.0;
        let slopes: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(-amp..amp)).collect();
        Self::from_hermite(&nodes, &values, &slopes).expect("random Hermite data is valid")
    }

    /// f(t) = t(1 − t) on [0, 1].
    pub fn bump() -> Self {
        Self::new(vec![0.0, 1.0], vec![[0.0, 1.0, -1.0, 0.0]]).expect("valid")
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().flatten().all(|c| *c == 0.0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coefficients(&self) -> &[[f64; 4]] {
        &self.coefficients
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.breakpoints.first()?, *self.breakpoints.last()?))
    }

    fn piece(&self, t: f64) -> Option<usize> {
        let (lo, hi) = self.support()?;
        if t < lo || t >= hi {
            return None;
        }
        Some(self.breakpoints.partition_point(|b| *b <= t) - 1)
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        match self.piece(t) {
            Some(i) => horner(&self.coefficients[i], t - self.breakpoints[i]),
            None => 0.0,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self.piece(t) {
            Some(i) => horner_d(&self.coefficients[i], t - self.breakpoints[i]),
            None => 0.0,
        }
    }

    // ∫_a^b f² over the support, exact
    fn sq_integral(&self, a: f64, b: f64) -> f64 {
        let mut s = 0.0;
        for (i, c) in self.coefficients.iter().enumerate() {
            let lo = self.breakpoints[i].max(a);
            let hi = self.breakpoints[i + 1].min(b);
            if hi > lo {
                let o = self.breakpoints[i];
                s += sq_antiderivative(c, hi - o) - sq_antiderivative(c, lo - o);
            }
        }
        s
    }

    pub fn norms(&self, window: &TimeWindow) -> NormBundle {
        let (t0, t) = (window.t0, window.t);
        let mut sup_f = 0.0f64;
        let mut sup_fp = 0.0f64;
        for (i, c) in self.coefficients.iter().enumerate() {
            let o = self.breakpoints[i];
            let lo = o.max(t0);
            let hi = self.breakpoints[i + 1].min(t);
            if hi < lo {
                continue;
            }
            let (xa, xb) = (lo - o, hi - o);
            let mut cand = vec![xa, xb];
            // f' = c1 + 2c2 x + 3c3 x²
            let (qa, qb, qc) = (3.0 * c[3], 2.0 * c[2], c[1]);
            if qa != 0.0 {
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let r = disc.sqrt();
                    cand.push((-qb + r) / (2.0 * qa));
                    cand.push((-qb - r) / (2.0 * qa));
                }
                cand.push(-qb / (2.0 * qa));
            } else if qb != 0.0 {
                cand.push(-qc / qb);
            }
            for x in cand {
                if x >= xa && x <= xb {
                    sup_f = sup_f.max(horner(c, x).abs());
                    sup_fp = sup_fp.max(horner_d(c, x).abs());
                }
            }
        }
        let on = self.sq_integral(t0, t);
        let off = self.sq_integral(f64::NEG_INFINITY, t0) + self.sq_integral(t, f64::INFINITY);
        let full = self.sq_integral(f64::NEG_INFINITY, f64::INFINITY);
        let l2_full = full.max(0.0).sqrt();
        NormBundle {
            sup_abs_f: sup_f,
            sup_abs_fprime: sup_fp,
            l2_full,
            l2_on_window: on.max(0.0).sqrt(),
            l2_off_window: off.max(0.0).sqrt(),
            triple_norm: sup_f + sup_fp + l2_full,
        }
    }

    pub fn forcing(&self) -> Forcing {
        self.scaled(Complex64::new(1.0, 0.0))
    }

    /// z·f as a forcing.
    pub fn scaled(&self, z: Complex64) -> Forcing {
        let pieces = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| Piece {
                lo: self.breakpoints[i],
                hi: self.breakpoints[i + 1],
                c: [z * c[0], z * c[1], z * c[2], z * c[3]],
            })
            .collect();
        Forcing { pieces }
    }
}

/// One polynomial piece on `[lo, hi)` in the local variable `t − lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub c: [Complex64; 4],
}

impl Piece {
    pub fn at(&self, t: Complex64) -> Complex64 {
        let x = t - self.lo;
        ((self.c[3] * x + self.c[2]) * x + self.c[1]) * x + self.c[0]
    }

    pub fn deriv_at(&self, t: Complex64) -> Complex64 {
        let x = t - self.lo;
        (3.0 * self.c[3] * x + 2.0 * self.c[2]) * x + self.c[1]
    }

    // ∫_{a}^{b} p² exactly (bilinear, no conjugation), a, b real in the piece
    fn sq_integral(&self, a: f64, b: f64) -> Complex64 {
        let mut sq = [Complex64::new(0.0, 0.0); 7];
        for i in 0..4 {
            for j in 0..4 {
                sq[i + j] += self.c[i] * self.c[j];
            }
        }
        let anti = |x: f64| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in (0..7).rev() {
                acc = acc * x + sq[k] / (k as f64 + 1.0);
            }
            acc * x
        };
        anti(b - self.lo) - anti(a - self.lo)
    }

    fn integral(&self, a: f64, b: f64) -> Complex64 {
        let anti = |x: f64| {
            ((self.c[3] * (x / 4.0) + self.c[2] / 3.0) * x + self.c[1] / 2.0) * x * x + self.c[0] * x
        };
        anti(b - self.lo) - anti(a - self.lo)
    }

    fn shifted(&self, lo: f64, hi: f64) -> Piece {
        // re-expand around the new origin
        let d = lo - self.lo;
        let c = self.c;
        Piece {
            lo,
            hi,
            c: [
                ((c[3] * d + c[2]) * d + c[1]) * d + c[0],
                (3.0 * c[3] * d + 2.0 * c[2]) * d + c[1],
                3.0 * c[3] * d + c[2],
                c[3],
            ],
        }
    }
}

/// A complex piecewise-cubic source term, zero outside its pieces, read at
/// points with the right-continuous (half-open `[lo, hi)`) convention.
///
/// Covers z·f for a test function f and its indicator shifts
/// f + λ·1_{[lo,hi)}; the latter are not test functions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Forcing {
    pieces: Vec<Piece>,
}

impl From<&TestFunction> for Forcing {
    fn from(f: &TestFunction) -> Self {
        f.forcing()
    }
}

impl Forcing {
    pub fn zero() -> Self {
        Forcing { pieces: Vec::new() }
    }

    /// Upper bound on sup_Δ|s| + sup_Δ|s′| + (∫|s|²)^{1/2}, from sampled
    /// values plus a Lipschitz allowance. Jumps between pieces are ignored.
    pub fn norm_bound(&self, window: &TimeWindow) -> f64 {
        const SAMPLES: usize = 64;
        let mut sup_f = 0.0f64;
        let mut sup_fp = 0.0f64;
        let mut l2 = 0.0;
        for p in &self.pieces {
            let len = p.hi - p.lo;
            if len.is_finite() {
                let g = rule(8);
                l2 += g.integrate(p.lo, p.hi, |t| Complex64::new(p.at(Complex64::new(t, 0.0)).norm_sqr(), 0.0)).re;
            }
            let lo = p.lo.max(window.t0);
            let hi = p.hi.min(window.t);
            if !(hi > lo) {
                continue;
            }
            let span = hi - p.lo;
            let [_, c1, c2, c3] = p.c.map(|z| z.norm());
            let lip_f = c1 + 2.0 * c2 * span + 3.0 * c3 * span * span;
            let lip_fp = 2.0 * c2 + 6.0 * c3 * span;
            let h = (hi - lo) / SAMPLES as f64;
            for j in 0..=SAMPLES {
                let t = Complex64::new(lo + j as f64 * h, 0.0);
                sup_f = sup_f.max(p.at(t).norm() + 0.5 * h * lip_f);
                sup_fp = sup_fp.max(p.deriv_at(t).norm() + 0.5 * h * lip_fp);
            }
        }
        sup_f + sup_fp + l2.sqrt()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces
            .iter()
            .all(|p| p.c.iter().all(|c| c.norm() == 0.0))
    }

    /// Interior breakpoints (piece ends) in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pieces.iter().flat_map(|p| [p.lo, p.hi]).collect();
        v.dedup();
        v
    }

    /// Index of the piece containing `t` with `lo ≤ t < hi`.
    pub fn piece_right(&self, t: f64) -> Option<usize> {
        let i = self.pieces.partition_point(|p| p.hi <= t);
        (i < self.pieces.len() && self.pieces[i].lo <= t).then_some(i)
    }

    /// Index of the piece containing `t` with `lo < t ≤ hi`.
    pub fn piece_left(&self, t: f64) -> Option<usize> {
        let i = self.pieces.partition_point(|p| p.hi < t);
        (i < self.pieces.len() && self.pieces[i].lo < t).then_some(i)
    }

    pub fn value(&self, t: f64) -> Complex64 {
        match self.piece_right(t) {
            Some(i) => self.pieces[i].at(Complex64::new(t, 0.0)),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        match self.piece_right(t) {
            Some(i) => self.pieces[i].deriv_at(Complex64::new(t, 0.0)),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// ∫_a^b s² (bilinear); infinite bounds allowed.
    pub fn sq_integral(&self, a: f64, b: f64) -> Complex64 {
        self.pieces
            .iter()
            .filter_map(|p| {
                let lo = p.lo.max(a);
                let hi = p.hi.min(b);
                (hi > lo).then(|| p.sq_integral(lo, hi))
            })
            .sum()
    }

    /// ∫_a^b s; infinite bounds allowed.
    pub fn integral(&self, a: f64, b: f64) -> Complex64 {
        self.pieces
            .iter()
            .filter_map(|p| {
                let lo = p.lo.max(a);
                let hi = p.hi.min(b);
                (hi > lo).then(|| p.integral(lo, hi))
            })
            .sum()
    }

    /// ∫ s² over the complement of [t0, t].
    pub fn sq_integral_outside(&self, t0: f64, t: f64) -> Complex64 {
        self.sq_integral(f64::NEG_INFINITY, t0) + self.sq_integral(t, f64::INFINITY)
    }

    pub fn scale(&self, z: Complex64) -> Forcing {
        Forcing {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    lo: p.lo,
                    hi: p.hi,
                    c: [z * p.c[0], z * p.c[1], z * p.c[2], z * p.c[3]],
                })
                .collect(),
        }
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Forcing) -> Forcing {
        let mut cuts: Vec<f64> = self
            .pieces
            .iter()
            .chain(&other.pieces)
            .flat_map(|p| [p.lo, p.hi])
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let mut c = [Complex64::new(0.0, 0.0); 4];
            let mut any = false;
            for src in [self, other] {
                if let Some(i) = src.piece_right(mid) {
                    let s = src.pieces[i].shifted(lo, hi);
                    for k in 0..4 {
                        c[k] += s.c[k];
                    }
                    any = true;
                }
            }
            if any {
                pieces.push(Piece { lo, hi, c });
            }
        }
        Forcing { pieces }
    }

    /// self + λ·1_{[lo,hi)} with complex λ.
    pub fn with_indicator(&self, lo: f64, hi: f64, lambda: Complex64) -> Forcing {
        if lambda.norm() == 0.0 {
            return self.clone();
        }
        let z = Complex64::new(0.0, 0.0);
        let ind = Forcing {
            pieces: vec![Piece {
                lo,
                hi,
                c: [lambda, z, z, z],
            }],
        };
        self.add(&ind)
    }
}

/// f + λ·1_{[lo,hi)} as a forcing.
pub fn add_indicator_shift(f: &TestFunction, lo: f64, hi: f64, lambda: f64) -> Result<Forcing> {
    if !(lo < hi) {
        return Err(Error::Domain(format!("indicator needs lo < hi, got [{lo}, {hi})")));
    }
    Ok(f.forcing().with_indicator(lo, hi, Complex64::new(lambda, 0.0)))
}
