//! Quadrature rules for ∫_a^b F(s) ds where F is analytic near [a, b]
//! apart from points just outside (or at) the ends, where it may behave
//! like (s − p)^{±1/2}·e^{iα/(s − p)} (left) or the mirror image (right).
//!
//! Ends carrying an essential singularity are reached along the
//! steepest-descent arc of e^{iα/τ}, on which that factor is a pure
//! exponential decay. Algebraic ends use a quadratic clustering map.
//! Nearby but non-touching singular points are handled by bisection
//! grading plus sub-panels sized by the phase variation.

use num_complex::Complex64;

use super::rule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Singular {
    pub at: f64,
    /// Strength of the essential part: F ∼ e^{iα/|s − at|}.
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub s: Complex64,
    pub w: Complex64,
    /// A real point within [a, b] from which `s` is reached by a straight leg.
    pub anchor: f64,
}

const ORDER: usize = 16;
const ALPHA_FLOOR: f64 = 1e-14;
const Y_END: f64 = 40.0;
const MAX_SUBPANELS: usize = 4096;
const ARC_SWITCH: f64 = 16.0;

fn touches(end: f64, p: f64, scale: f64) -> bool {
    (end - p).abs() <= 8.0 * f64::EPSILON * scale.max(1.0)
}

pub(crate) fn interval_rule(
    a: f64,
    b: f64,
    left: Option<Singular>,
    right: Option<Singular>,
    others: &[Singular],
    out: &mut Vec<Node>,
) {
    if !(b > a) {
        return;
    }
    let scale = a.abs().max(b.abs());
    let len = b - a;
    let tl = left.filter(|s| touches(a, s.at, scale));
    let tr = right.filter(|s| touches(b, s.at, scale));
    if let (Some(l), Some(r)) = (tl, tr) {
        let (el, er) = (l.alpha > ALPHA_FLOOR, r.alpha > ALPHA_FLOOR);
        if el != er && others.is_empty() {
            // one arc over the whole interval; the algebraic end sits at y = 0
            let alpha = if el { l.alpha } else { r.alpha };
            return arc(a, b, alpha, el, true, out);
        }
        // both algebraic: midpoint; both essential: the saddle of the phase
        let m = if el && er {
            let (sl, sr) = (l.alpha.sqrt(), r.alpha.sqrt());
            a + len * sl / (sl + sr)
        } else {
            0.5 * (a + b)
        };
        interval_rule(a, m, left, right, others, out);
        interval_rule(m, b, left, right, others, out);
        return;
    }
    if tl.is_none() {
        if let Some(s) = left {
            if a - s.at < len {
                let m = 0.5 * (a + b);
                interval_rule(a, m, left, right, others, out);
                interval_rule(m, b, left, right, others, out);
                return;
            }
        }
    }
    if tr.is_none() {
        if let Some(s) = right {
            if s.at - b < len {
                let m = 0.5 * (a + b);
                interval_rule(a, m, left, right, others, out);
                interval_rule(m, b, left, right, others, out);
                return;
            }
        }
    }
    for s in others {
        let d = (a - s.at).max(s.at - b);
        if d < len {
            let m = 0.5 * (a + b);
            interval_rule(a, m, left, right, others, out);
            interval_rule(m, b, left, right, others, out);
            return;
        }
    }
    // phase variation contributed by the non-touching singular points
    let mut var: f64 = others
        .iter()
        .map(|s| s.alpha * (1.0 / (a - s.at).abs() - 1.0 / (b - s.at).abs()).abs())
        .sum();
    if tl.is_none() {
        if let Some(s) = left {
            var += s.alpha * (1.0 / (a - s.at) - 1.0 / (b - s.at));
        }
    }
    if tr.is_none() {
        if let Some(s) = right {
            var += s.alpha * (1.0 / (s.at - b) - 1.0 / (s.at - a));
        }
    }
    // A strongly oscillating left factor is integrated as the difference of
    // two descent arcs from its singular point; the integrand must then be
    // analytic in the lower half-disk over [at, b].
    if let (None, Some(l)) = (tl, left) {
        let right_ok = match (tr, right) {
            (Some(r), _) => r.alpha <= ALPHA_FLOOR,
            (None, Some(r)) => r.at - b >= len,
            (None, None) => true,
        };
        let var_l = l.alpha * (1.0 / (a - l.at) - 1.0 / (b - l.at));
        if l.alpha > ALPHA_FLOOR && var_l > ARC_SWITCH && right_ok && others.is_empty() {
            let start = out.len();
            arc(l.at, a, l.alpha, true, false, out);
            for nd in &mut out[start..] {
                nd.w = -nd.w;
            }
            arc(l.at, b, l.alpha, true, tr.is_some(), out);
            for nd in &mut out[start..] {
                nd.anchor = nd.anchor.clamp(a, b);
            }
            return;
        }
    }
    let m = ((var / 2.0).ceil() as usize).clamp(1, MAX_SUBPANELS);
    match (tl, tr) {
        (Some(s), None) if s.alpha > ALPHA_FLOOR => arc(a, b, s.alpha, true, false, out),
        (None, Some(s)) if s.alpha > ALPHA_FLOOR => arc(a, b, s.alpha, false, false, out),
        (Some(_), None) => clustered(a, b, true, m, out),
        (None, Some(_)) => clustered(a, b, false, m, out),
        _ => plain(a, b, m, out),
    }
}

fn plain(a: f64, b: f64, m: usize, out: &mut Vec<Node>) {
    let g = rule(ORDER);
    let h = (b - a) / m as f64;
    for j in 0..m {
        let lo = a + j as f64 * h;
        for (x, w) in g.nodes.iter().zip(&g.weights) {
            let s = lo + 0.5 * h * (x + 1.0);
            out.push(Node {
                s: Complex64::new(s, 0.0),
                w: Complex64::new(0.5 * h * w, 0.0),
                anchor: s,
            });
        }
    }
}

// s = a + len·w² (left) or s = b − len·w² (right), w ∈ [0, 1]
fn clustered(a: f64, b: f64, at_left: bool, m: usize, out: &mut Vec<Node>) {
    let g = rule(ORDER);
    let len = b - a;
    let h = 1.0 / m as f64;
    for j in 0..m {
        let lo = j as f64 * h;
        for (x, wt) in g.nodes.iter().zip(&g.weights) {
            let w = lo + 0.5 * h * (x + 1.0);
            let jac = 2.0 * len * w * 0.5 * h * wt;
            let s = if at_left { a + len * w * w } else { b - len * w * w };
            if s == a || s == b {
                continue;
            }
            out.push(Node {
                s: Complex64::new(s, 0.0),
                w: Complex64::new(jac, 0.0),
                anchor: s,
            });
        }
    }
}

// τ(y) = L/(1 + iy/λ), λ = α/L, along which e^{iα/τ} = e^{iα/L}·e^{−y}.
// With `sqrt_far`, the far end carries an algebraic singularity, which
// becomes y^{−1/2} at y = 0 and is removed by y = y₁w² on the first panel.
fn arc(a: f64, b: f64, alpha: f64, at_left: bool, sqrt_far: bool, out: &mut Vec<Node>) {
    let g = rule(ORDER);
    let len = b - a;
    let lambda = alpha / len;
    let i = Complex64::new(0.0, 1.0);
    let mut y0 = 0.0f64;
    while y0 < Y_END {
        let step = (y0 * y0 + lambda * lambda).sqrt().min(1.0 + 0.5 * y0);
        let y1 = (y0 + step).min(Y_END);
        let h = y1 - y0;
        let first = sqrt_far && y0 == 0.0;
        for (x, wt) in g.nodes.iter().zip(&g.weights) {
            let (y, wt) = if first {
                let w = 0.5 * (x + 1.0);
                (h * w * w, wt * 2.0 * w)
            } else {
                (y0 + 0.5 * h * (x + 1.0), *wt)
            };
            let den = 1.0 + i * (y / lambda);
            let tau = len / den;
            let dtau = -i * (len / lambda) / (den * den);
            let (s, w) = if at_left {
                (a + tau, -dtau * (0.5 * h * wt))
            } else {
                (b - tau, -dtau * (0.5 * h * wt))
            };
            out.push(Node {
                s,
                w,
                anchor: s.re.clamp(a, b),
            });
        }
        y0 = y1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply<F: Fn(Complex64) -> Complex64>(nodes: &[Node], f: F) -> Complex64 {
        nodes.iter().map(|n| n.w * f(n.s)).sum()
    }

    #[test]
    fn regular_polynomial() {
        let mut v = Vec::new();
        interval_rule(0.0, 2.0, None, None, &[], &mut v);
        let r = apply(&v, |s| s * s);
        assert!((r.re - 8.0 / 3.0).abs() < 1e-13 && r.im.abs() < 1e-15);
    }

    #[test]
    fn algebraic_ends() {
        // ∫_0^1 s^{-1/2} ds = 2 and ∫_0^1 (1−s)^{-1/2} ds = 2
        let mut v = Vec::new();
        interval_rule(0.0, 1.0, Some(Singular { at: 0.0, alpha: 0.0 }), None, &[], &mut v);
        assert!((apply(&v, |s| 1.0 / s.sqrt()).re - 2.0).abs() < 1e-13);
        v.clear();
        interval_rule(0.0, 1.0, None, Some(Singular { at: 1.0, alpha: 0.0 }), &[], &mut v);
        let r = apply(&v, |s| 1.0 / (1.0 - s).sqrt());
        assert!((r.re - 2.0).abs() < 1e-13);
    }

    #[test]
    fn essential_left_end() {
        // ∫_0^1 s^{-1/2} e^{iα/s} ds = ∫_1^∞ u^{-3/2} e^{iαu} du
        let alpha = 0.3;
        let mut v = Vec::new();
        interval_rule(0.0, 1.0, Some(Singular { at: 0.0, alpha }), None, &[], &mut v);
        let r = apply(&v, |s| (Complex64::new(0.0, alpha) / s).exp() / s.sqrt());
        // reference by splitting the u-integral: adaptive on [1, U] plus the
        // asymptotic tail via integration by parts
        let f = |u: f64| Complex64::new(0.0, alpha * u).exp() * u.powf(-1.5);
        let big = 4000.0;
        let head = crate::numerics::oracle::adaptive(f, 1.0, big, 1e-13, 1e-13, 200000);
        let i = Complex64::new(0.0, 1.0);
        let e = (i * alpha * big).exp();
        // ∫_U^∞ u^{-3/2}e^{iαu} ≈ −e^{iαU}U^{-3/2}/(iα) + (3/2)e^{iαU}U^{-5/2}/(iα)^2 ...
        let tail = -e * big.powf(-1.5) / (i * alpha)
            - 1.5 * e * big.powf(-2.5) / ((i * alpha) * (i * alpha))
            + 3.75 * e * big.powf(-3.5) / ((i * alpha).powi(3));
        let reference = head + tail;
        assert!((r - reference).norm() < 1e-9, "{r} vs {reference}");
    }

    #[test]
    fn essential_right_end_mirrors_left() {
        let alpha = 0.05;
        let mut v = Vec::new();
        interval_rule(0.0, 0.5, None, Some(Singular { at: 0.5, alpha }), &[], &mut v);
        let r = apply(&v, |s| {
            let tau = 0.5 - s;
            (Complex64::new(0.0, alpha) / tau).exp() / tau.sqrt()
        });
        let mut v = Vec::new();
        interval_rule(0.0, 0.5, Some(Singular { at: 0.0, alpha }), None, &[], &mut v);
        let l = apply(&v, |s| (Complex64::new(0.0, alpha) / s).exp() / s.sqrt());
        assert!((r - l).norm() < 1e-12);
    }

    #[test]
    fn graded_near_singularity() {
        // ∫_1^2 (s)^{-1/2} e^{i·0.2/s} ds with singular point 0 outside the interval
        let alpha = 0.2;
        let mut v = Vec::new();
        interval_rule(0.01, 1.0, Some(Singular { at: 0.0, alpha }), None, &[], &mut v);
        let r = apply(&v, |s| (Complex64::new(0.0, alpha) / s).exp() / s.sqrt());
        let reference = crate::numerics::oracle::adaptive(
            |s| Complex64::new(0.0, alpha / s).exp() / s.sqrt(),
            0.01,
            1.0,
            1e-14,
            1e-14,
            100000,
        );
        assert!((r - reference).norm() < 1e-11, "{r} vs {reference}");
    }

    #[test]
    fn essential_and_algebraic_ends_together() {
        // ∫_0^1 s^{-1/2} e^{iα/s} (1 − s)^{-1/2} ds, whole-interval arc versus
        // a split at 1/2 handled by the one-sided rules
        let alpha = 0.3;
        let f = |s: Complex64| (s.sqrt() * (1.0 - s).sqrt()).inv() * (Complex64::new(0.0, alpha) / s).exp();
        let l = Singular { at: 0.0, alpha };
        let r = Singular { at: 1.0, alpha: 0.0 };
        let mut v = Vec::new();
        interval_rule(0.0, 1.0, Some(l), Some(r), &[], &mut v);
        let whole = apply(&v, f);
        let mut v1 = Vec::new();
        interval_rule(0.0, 0.5, Some(l), None, &[], &mut v1);
        let mut v2 = Vec::new();
        interval_rule(0.5, 1.0, None, Some(r), &[l], &mut v2);
        let split = apply(&v1, f) + apply(&v2, f);
        assert!((whole - split).norm() < 1e-11, "{whole} {split}");
    }

    #[test]
    fn far_oscillation_by_arc_difference() {
        // ∫_a^b s^{-1/2} e^{iα/s} ds with α/a large, against a fine plain rule
        let alpha = 2.0;
        let f = |s: Complex64| s.sqrt().inv() * (Complex64::new(0.0, alpha) / s).exp();
        let l = Singular { at: 0.0, alpha };
        let (a, b) = (0.01, 0.02);
        let mut v = Vec::new();
        interval_rule(a, b, Some(l), None, &[], &mut v);
        assert!(v.iter().all(|n| n.anchor >= a && n.anchor <= b));
        let got = apply(&v, f);
        let mut v1 = Vec::new();
        plain(a, b, 400, &mut v1);
        let reference = apply(&v1, f);
        assert!((got - reference).norm() < 1e-11 * reference.norm(), "{got} {reference}");
    }
}
