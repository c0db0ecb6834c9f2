use std::f64::consts::PI;

use num_complex::Complex64;

use super::*;
use crate::kernels::{harmonic_kernel, OscillatorProblem, TimeWindow};
use crate::measures::SignedMeasure;
use crate::numerics::oracle::adaptive;
use crate::numerics::{c, I};
use crate::testfn::{Forcing, TestFunction};

fn sample() -> (SignedMeasure, OscillatorProblem) {
    let p = OscillatorProblem::new(0.0, 0.5, 1.0, 0.3, 0.3).unwrap();
    (SignedMeasure::single_atom(0.2, 0.0, p.window), p)
}

fn cubic() -> Forcing {
    TestFunction::from_hermite(&[-0.5, 0.2, 0.5, 1.0], &[0.0, 0.3, -0.2, 0.0], &[0.0, 0.5, 1.0, 0.0])
        .unwrap()
        .forcing()
}

/// −i c E ∫ K(x,t|a,s) K(a,s|x0,t0) ds with x0 = x = a, by adaptive
/// quadrature after s = t0 + |Δ|(1 − cos θ)/2.
fn first_term_oracle(cc: f64, p: &OscillatorProblem, f: &Forcing, prefactor: Complex64) -> Complex64 {
    let len = p.window.len();
    let integral = adaptive(
        |th| {
            let s = p.t0() + len * (1.0 - th.cos()) / 2.0;
            let ds = len * th.sin() / 2.0;
            let a = harmonic_kernel(&p.between(p.x0, s, p.x, p.t()).unwrap(), f).unwrap();
            let b = harmonic_kernel(&p.between(p.x0, p.t0(), p.x0, s).unwrap(), f).unwrap();
            a * b * ds
        },
        1e-12,
        PI - 1e-12,
        1e-14,
        1e-13,
        4000,
    );
    -I * cc * prefactor * integral
}

#[test]
fn zero_measure_is_the_bare_transform() {
    let (_, p) = sample();
    let nu = SignedMeasure::zero(p.window);
    let r = propagator_series(&nu, &p, &Forcing::zero(), 1e-9, 10).unwrap();
    assert_eq!(r.terms.len(), 1);
    assert_eq!(r.certified_error, 0.0);
    let t0 = crate::transforms::t_transform_harmonic(&p, &Forcing::zero()).unwrap();
    assert_eq!(r.value(), t0);
}

#[test]
fn first_order_matches_direct_quadrature() {
    let p = OscillatorProblem::new(0.1, 0.7, 1.2, 0.25, 0.25).unwrap();
    let nu = SignedMeasure::single_atom(0.4, 0.25, p.window);
    for f in [Forcing::zero(), cubic()] {
        let s = DysonSolver::new(&nu, &p, &f, SeriesOptions::default()).unwrap();
        let got = s.terms(1).unwrap()[1];
        let want = first_term_oracle(0.4, &p, &f, s.prefactor());
        assert!((got - want).norm() < 1e-8 * want.norm(), "{got} vs {want}");
    }
}

#[test]
fn second_order_matches_oracle_iterate() {
    let (nu, p) = sample();
    let f = Forcing::zero();
    let s = DysonSolver::new(&nu, &p, &f, SeriesOptions::default()).unwrap();
    let terms = s.terms(2).unwrap();
    let oracle = volterra_iterates(&nu, &p, &f, 400, 2).unwrap();
    // on the scale of the propagator itself
    let scale = oracle[0].norm();
    for n in 1..=2 {
        let series = terms[n] / s.prefactor();
        assert!(
            (series - oracle[n]).norm() < 1e-6 * scale,
            "order {n}: {series} vs {}",
            oracle[n]
        );
    }
}

#[test]
fn first_order_matches_picard_in_the_free_limit() {
    let p = OscillatorProblem::new(0.0, 0.5, 1e-6, -0.2, 0.4).unwrap();
    let nu = SignedMeasure::single_atom(0.05, 0.1, p.window);
    let f = Forcing::zero();
    let s = DysonSolver::new(&nu, &p, &f, SeriesOptions::default()).unwrap();
    let series = s.terms(1).unwrap()[1];
    let picard = volterra_iterates(&nu, &p, &f, 400, 1).unwrap()[1];
    assert!((series - picard).norm() < 1e-6 * picard.norm(), "{series} vs {picard}");
}

#[test]
fn terms_are_dominated_by_the_bound() {
    let (nu, p) = sample();
    let bp = BoundParams::default_for(&nu, &p).unwrap();
    let terms = DysonSolver::new(&nu, &p, &Forcing::zero(), SeriesOptions::default())
        .unwrap()
        .terms(4)
        .unwrap();
    for (n, t) in terms.iter().enumerate() {
        let cn = tail_bound_cn(n, &nu, &p, &bp).unwrap();
        assert!(t.norm() <= cn, "order {n}: |term| = {} > C_n = {cn}", t.norm());
    }
}

#[test]
fn bound_ratios_decrease_to_zero() {
    let (nu, p) = sample();
    let bp = BoundParams::default_for(&nu, &p).unwrap();
    let ln: Vec<f64> = (0..=31).map(|n| log_tail_bound_cn(n, &nu, &p, &bp).unwrap()).collect();
    let ratios: Vec<f64> = ln.windows(2).map(|w| (w[1] - w[0]).exp()).collect();
    for w in ratios.windows(2).skip(1) {
        assert!(w[1] < w[0], "{ratios:?}");
    }
    // power-law decay: halving persists down the sequence
    for (m, n) in [(3, 7), (7, 15), (15, 30)] {
        assert!(ratios[n] / ratios[m] < 0.9, "{ratios:?}");
    }
}

#[test]
fn terms_are_homogeneous_in_the_coupling() {
    let (nu, p) = sample();
    let f = Forcing::zero();
    let base = DysonSolver::new(&nu, &p, &f, SeriesOptions::default()).unwrap().terms(3).unwrap();
    for cc in [0.5, 2.0] {
        let scaled = DysonSolver::new(&nu.scaled(cc), &p, &f, SeriesOptions::default())
            .unwrap()
            .terms(3)
            .unwrap();
        for n in 0..=3 {
            let want = base[n] * cc.powi(n as i32);
            assert!((scaled[n] - want).norm() <= 1e-10 * want.norm(), "c={cc} n={n}");
        }
    }
}

#[test]
fn series_converges_to_the_oracle() {
    let (nu, p) = sample();
    let f = Forcing::zero();
    let r = propagator_series(&nu, &p, &f, 1e-9, 30).unwrap();
    assert!(r.certified_error < 1e-9);
    // |S_{n+1} − S_n|
    let incr: Vec<f64> = r.partial_sums.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    assert!(incr.windows(2).all(|w| w[1] < w[0]));
    assert!(incr[..=6].iter().any(|d| *d < 1e-8), "{incr:?}");
    let oracle = volterra_oracle(&nu, &p, &f, 500).unwrap();
    assert!((r.kernel_value() - oracle).norm() < 1e-6 * oracle.norm());
}

#[test]
fn indicator_shift_leaves_the_kernel_sum_unchanged() {
    let p = OscillatorProblem::new(0.1, 0.6, 0.8, -0.1, 0.2).unwrap();
    let nu = SignedMeasure::single_atom(0.3, 0.05, p.window);
    let f = cubic();
    let opts = SeriesOptions::default();
    let base = DysonSolver::new(&nu, &p, &f, opts).unwrap();
    let g = f.with_indicator(p.t0() - 0.2, p.t() + 0.1, c(1.5));
    let shifted = DysonSolver::new(&nu, &p, &g, opts).unwrap();
    let a = base.terms(2).unwrap();
    let b = shifted.terms(2).unwrap();
    for n in 0..=2 {
        let (x, y) = (a[n] / base.prefactor(), b[n] / shifted.prefactor());
        assert!((x - y).norm() < 1e-8 * a[0].norm() / base.prefactor().norm(), "order {n}: {x} vs {y}");
    }
}

#[test]
fn oracle_without_coupling_is_the_bare_kernel() {
    let (_, p) = sample();
    let nu = SignedMeasure::single_atom(0.0, 0.0, p.window);
    let f = cubic();
    assert_eq!(volterra_oracle(&nu, &p, &f, 100).unwrap(), harmonic_kernel(&p, &f).unwrap());
    assert!(volterra_oracle(&nu, &p, &f, 50).is_err());
}

#[test]
fn simplex_formula_matches_nested_quadrature() {
    let nested = crate::verify::simplex_quadrature;
    for (n, levels) in [(1, 7), (2, 6), (3, 5)] {
        for alpha in [0.25, 0.5] {
            let closed = simplex_gamma_integral(n, alpha, 1.0).unwrap();
            let quad = nested(n, alpha, 0.0, levels);
            assert!((closed - quad).abs() < 1e-6 * closed, "n={n} α={alpha}: {closed} vs {quad}");
        }
    }
    let closed = simplex_gamma_integral(1, 0.01, 1.0).unwrap();
    let quad = nested(1, 0.01, 0.0, 6);
    assert!((closed - quad).abs() < 1e-4 * closed, "{closed} vs {quad}");
    let scaled = simplex_gamma_integral(2, 0.5, 2.0).unwrap();
    assert!((scaled - PI / 4.0 * 2f64.powf(0.5)).abs() < 1e-12);
}

#[test]
fn growth_constant_is_monotone() {
    for (k, len) in [(0.0, 0.3), (0.5, 1.0), (1.0, 0.2), (2.0, 0.7)] {
        let l = eq11_constant(k, len);
        assert!(eq11_constant(k + 0.1, len) > l || (k == 0.0 && len == 0.0));
        assert!(eq11_constant(k, len + 0.1) > l);
    }
}

#[test]
fn unreachable_tolerance_reports_max_order() {
    let (nu, p) = sample();
    match propagator_series(&nu, &p, &Forcing::zero(), 1e-300, 3) {
        Err(crate::error::Error::MaxOrderExceeded(r)) => assert_eq!(r.terms.len(), 4),
        other => panic!("{other:?}"),
    }
    let _ = TimeWindow::new(0.0, 1.0).unwrap();
}
