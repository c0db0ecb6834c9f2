//! Seeded randomized checks of the identities and bounds the library must
//! satisfy. Each suite reports its worst observed defect next to its
//! threshold.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyson::{
    log_tail_bound_cn, propagator_series, simplex_gamma_integral, volterra_oracle, BoundParams,
    DysonSolver, SeriesOptions,
};
use crate::error::Result;
use crate::kernels::{
    chapman_kolmogorov_defect, free_kernel, harmonic_kernel, lemma42_defect, schrodinger_residual,
    KernelKind, OscillatorProblem,
};
use crate::measures::SignedMeasure;
use crate::numerics::oracle::tanh_sinh;
use crate::numerics::I;
use crate::testfn::{Forcing, TestFunction};
use crate::transforms::{log_growth_bound_check, product_formula_check, t_transform_free, PinConfiguration};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub samples: usize,
    /// worst observed defect, in the units of `threshold`
    pub max_defect: f64,
    pub threshold: f64,
    pub passed: bool,
    /// further observed numbers, by label
    pub observed: Vec<(String, f64)>,
}

impl SuiteReport {
    fn new(name: &str, samples: usize, max_defect: f64, threshold: f64) -> Self {
        SuiteReport {
            name: name.into(),
            samples,
            max_defect,
            threshold,
            passed: max_defect < threshold,
            observed: Vec::new(),
        }
    }

    fn with(mut self, label: &str, value: f64, ok: bool) -> Self {
        self.observed.push((label.into(), value));
        self.passed &= ok;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// coarsest grid of the Volterra oracle
    pub oracle_grid: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 20_240_601,
            oracle_grid: 2000,
        }
    }
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Random admissible problem with k·|Δ| ≤ 1.4.
fn problem<R: Rng>(r: &mut R, k: f64) -> OscillatorProblem {
    let t0 = r.gen_range(-0.5..0.5);
    let max_len = if k > 0.0 { (1.4 / k).min(1.2) } else { 1.2 };
    let len = r.gen_range(0.3..max_len);
    OscillatorProblem::new(t0, t0 + len, k, r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
        .expect("sampled problem is admissible")
}

fn cubic_around<R: Rng>(r: &mut R, p: &OscillatorProblem) -> TestFunction {
    let pieces = r.gen_range(2..5);
    TestFunction::random(r, p.t0() - 0.3, p.t() + 0.3, pieces, 1.0)
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Residual of the Schrödinger operator for both kernels at h = 1e-3
/// and its observed order under halving.
pub fn schrodinger_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = rng(seed, 1);
    let h = 1e-3;
    let (mut worst, mut min_order) = (0.0f64, f64::INFINITY);
    let mut samples = 0;
    for i in 0..10 {
        let k = if i % 2 == 0 { 0.3 } else { 1.0 };
        let mut p = problem(&mut r, k);
        p.window.t = p.window.t.max(p.t0() + 0.6);
        let f = cubic_around(&mut r, &p).forcing();
        let bps = f.breakpoints();
        let mut grid = Vec::new();
        // the truncation error grows like h²((x − x0)²/(2τ²))³, so points
        // stay at τ = t − t0 ≥ 0.3
        while grid.len() < 4 {
            let t = r.gen_range(p.t0() + 0.3..p.t() - 0.01);
            // the stencil must not straddle a jump of f″
            if bps.iter().all(|b| (b - t).abs() > 4.0 * h) {
                grid.push((r.gen_range(-1.0..1.0), t));
            }
        }
        for kind in [KernelKind::Free, KernelKind::Harmonic] {
            let a = schrodinger_residual(kind, &p, &f, h, &grid)?;
            let b = schrodinger_residual(kind, &p, &f, h / 2.0, &grid)?;
            worst = worst.max(a);
            min_order = min_order.min(order(a, b));
            samples += 1;
        }
    }
    Ok(SuiteReport::new("schrodinger_residual", samples, worst, 1e-3).with(
        "min_observed_order",
        min_order,
        min_order >= 1.9,
    ))
}

/// Semigroup defect over random splits; every fifth sample has f ≡ 0.
pub fn chapman_kolmogorov_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = rng(seed, 2);
    let (mut forced, mut free) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let k = r.gen_range(0.0..1.2);
        let p = problem(&mut r, k);
        let s = p.t0() + r.gen_range(0.1..0.9) * p.window.len();
        if i % 5 == 0 {
            free = free.max(chapman_kolmogorov_defect(&p, &Forcing::zero(), s)?);
        } else {
            let f = cubic_around(&mut r, &p).forcing();
            forced = forced.max(chapman_kolmogorov_defect(&p, &f, s)?);
        }
    }
    Ok(SuiteReport::new("chapman_kolmogorov", 50, forced, 1e-8).with("max_defect_f_zero", free, free < 1e-10))
}

/// Invariance of K_h under f → f + λ1_{[lo,hi)} with [t0, t] ⊂ [lo, hi).
pub fn shift_invariance_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = rng(seed, 3);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let k = r.gen_range(0.0..1.2);
        let p = problem(&mut r, k);
        let f = cubic_around(&mut r, &p).forcing();
        let lo = p.t0() - r.gen_range(0.0..0.5);
        let hi = p.t() + r.gen_range(1e-3..0.5);
        worst = worst.max(lemma42_defect(&p, &f, lo, hi, r.gen_range(-5.0..5.0))?);
    }
    Ok(SuiteReport::new("indicator_shift", 50, worst, 1e-10))
}

/// λ-integral product formula against the single-pin transform.
pub fn product_formula_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = rng(seed, 4);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let k = r.gen_range(0.0..1.2);
        let p = problem(&mut r, k);
        let f = cubic_around(&mut r, &p).forcing();
        let pin = (p.t0() + r.gen_range(0.1..0.9) * p.window.len(), r.gen_range(-1.0..1.0));
        worst = worst.max(product_formula_check(&p, pin, &f)?);
    }
    Ok(SuiteReport::new("product_formula", 50, worst, 1e-8))
}

/// TI₀ against K₀^(f)·e^{ixf(t) − ix0 f(t0)}·e^{−½|f_{Δᶜ}|²}, and TI₀(0)
/// against the free propagator.
pub fn free_transform_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = rng(seed, 5);
    let (mut worst, mut bare) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let p = problem(&mut r, 0.0);
        let f = cubic_around(&mut r, &p).forcing();
        let ti = t_transform_free(&p, &f)?;
        let k0 = free_kernel(p.x, p.t(), p.x0, p.t0(), &f)?;
        let rhs = k0
            * (I * (p.x * f.value(p.t()) - p.x0 * f.value(p.t0()))).exp()
            * (-0.5 * f.sq_integral_outside(p.t0(), p.t())).exp();
        worst = worst.max((ti - rhs).norm() / rhs.norm());
        let tau = p.window.len();
        let dx = p.x - p.x0;
        let closed = (2.0 * PI * I * tau).sqrt().inv() * (I * dx * dx / (2.0 * tau)).exp();
        let zero = t_transform_free(&p, &Forcing::zero())?;
        bare = bare.max((zero - closed).norm() / closed.norm());
    }
    Ok(SuiteReport::new("free_transform_identity", 50, worst, 1e-12).with(
        "max_defect_free_propagator",
        bare,
        bare < 1e-12,
    ))
}

/// Harmonic kernel at k = 1e-6 against the free kernel.
pub fn free_limit_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = rng(seed, 6);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = problem(&mut r, 1e-6);
        let f = cubic_around(&mut r, &p).forcing();
        let a = harmonic_kernel(&p, &f)?;
        let b = free_kernel(p.x, p.t(), p.x0, p.t0(), &f)?;
        worst = worst.max((a - b).norm() / b.norm());
    }
    Ok(SuiteReport::new("free_limit", 50, worst, 1e-5))
}

/// ∫ over lo < t1 < … < tn < 1 of Π (4·gap)^{−α}, by nested tanh–sinh.
pub fn simplex_quadrature(n: usize, alpha: f64, lo: f64, levels: usize) -> f64 {
    tanh_sinh(
        |t, da, db| {
            let rest = if n <= 1 {
                (4.0 * db).powf(-alpha)
            } else {
                simplex_quadrature(n - 1, alpha, t, levels)
            };
            (4.0 * da).powf(-alpha) * rest
        },
        lo,
        1.0,
        levels,
    )
}

/// Closed-form simplex integral against nested quadrature.
pub fn simplex_suite() -> Result<SuiteReport> {
    let mut worst = 0.0f64;
    for (n, levels) in [(1, 7), (2, 6), (3, 5)] {
        for alpha in [0.25, 0.5] {
            let closed = simplex_gamma_integral(n, alpha, 1.0)?;
            worst = worst.max((closed - simplex_quadrature(n, alpha, 0.0, levels)).abs() / closed);
        }
    }
    let quarter = (simplex_gamma_integral(1, 0.5, 1.0)? - PI / 4.0).abs();
    Ok(SuiteReport::new("simplex_gamma", 6, worst, 1e-6).with("abs_error_pi_over_4", quarter, quarter < 1e-10))
}

/// One evaluation of the growth bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub gamma: f64,
    pub z: Complex64,
    pub pins: PinConfiguration,
    pub lhs: f64,
    pub log_rhs: f64,
}

impl GrowthSample {
    pub fn holds(&self) -> bool {
        self.lhs.ln() <= self.log_rhs
    }

    pub fn lhs_over_rhs(&self) -> f64 {
        (self.lhs.ln() - self.log_rhs).exp()
    }
}

fn random_pins<R: Rng>(r: &mut R, p: &OscillatorProblem) -> PinConfiguration {
    let npins = r.gen_range(0..=3);
    let mut times: Vec<f64> = (0..npins)
        .map(|_| p.t0() + r.gen_range(0.05..0.95) * p.window.len())
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    PinConfiguration::new(times.iter().map(|t| (*t, r.gen_range(-1.5..1.5))).collect())
}

/// Up to three pins inside the window (unless given), |z| ≤ 2 and γ
/// alternating between 0.1 and 1.
fn growth_sample<R: Rng>(
    r: &mut R,
    i: usize,
    p: &OscillatorProblem,
    f: &TestFunction,
    fixed: Option<&PinConfiguration>,
) -> Result<GrowthSample> {
    let pins = match fixed {
        Some(pins) => pins.clone(),
        None => random_pins(r, p),
    };
    let z = Complex64::from_polar(r.gen_range(0.0..2.0), r.gen_range(-PI..PI));
    let gamma = if i % 2 == 0 { 0.1 } else { 1.0 };
    let (lhs, log_rhs) = log_growth_bound_check(p, &pins, f, z, gamma)?;
    Ok(GrowthSample { gamma, z, pins, lhs, log_rhs })
}

/// `count` seeded growth-bound samples on a fixed problem and test function;
/// pins are drawn per sample unless `pins` is given.
pub fn growth_bound_samples(
    p: &OscillatorProblem,
    f: &TestFunction,
    pins: Option<&PinConfiguration>,
    seed: u64,
    count: usize,
) -> Result<Vec<GrowthSample>> {
    let mut r = rng(seed, 9);
    (0..count).map(|i| growth_sample(&mut r, i, p, f, pins)).collect()
}

/// lhs ≤ rhs of the growth bound on random pinned configurations.
pub fn growth_bound_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = rng(seed, 8);
    let (mut violations, mut worst_ratio) = (0usize, 0.0f64);
    for i in 0..1000 {
        let k = r.gen_range(0.0..1.2);
        let p = problem(&mut r, k);
        let f = cubic_around(&mut r, &p);
        let s = growth_sample(&mut r, i, &p, &f, None)?;
        if !s.holds() {
            violations += 1;
        }
        worst_ratio = worst_ratio.max(s.lhs_over_rhs());
    }
    let mut rep = SuiteReport::new("growth_bound_violations", 1000, violations as f64, 1.0);
    rep.observed.push(("max_lhs_over_rhs".into(), worst_ratio));
    Ok(rep)
}

/// The sample problem of the series checks: ν = 0.2·δ0 ⊗ 1_Δ dt, k = 1,
/// Δ = [0, 0.5], x0 = x = 0.3.
pub fn sample_series_problem() -> (SignedMeasure, OscillatorProblem) {
    let p = OscillatorProblem::new(0.0, 0.5, 1.0, 0.3, 0.3).expect("valid");
    (SignedMeasure::single_atom(0.2, 0.0, p.window), p)
}

/// |terms[n]| ≤ C_n for n ≤ 4 and C_{n+1}/C_n decreasing up to n = 30.
pub fn domination_suite() -> Result<SuiteReport> {
    let (nu, p) = sample_series_problem();
    let bp = BoundParams::default_for(&nu, &p)?;
    let terms = DysonSolver::new(&nu, &p, &Forcing::zero(), SeriesOptions::default())?.terms(4)?;
    let mut worst = 0.0f64;
    for (n, t) in terms.iter().enumerate() {
        worst = worst.max(t.norm() / log_tail_bound_cn(n, &nu, &p, &bp)?.exp());
    }
    let ln = (0..=31)
        .map(|n| log_tail_bound_cn(n, &nu, &p, &bp))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = ln.windows(2).map(|w| (w[1] - w[0]).exp()).collect();
    let monotone = ratios.windows(2).all(|w| w[1] < w[0]);
    let decay = [(3, 7), (7, 15), (15, 30)].iter().all(|&(m, n)| ratios[n] / ratios[m] < 0.9);
    Ok(SuiteReport::new("term_domination", 5, worst, 1.0)
        .with("ratio_c1_over_c0", ratios[0], monotone && decay)
        .with("ratio_c31_over_c30", ratios[30], monotone && decay))
}

/// Certified series against the Volterra oracle on the sample problem.
pub fn series_oracle_suite(grid: usize) -> Result<SuiteReport> {
    let (nu, p) = sample_series_problem();
    let f = Forcing::zero();
    let r = propagator_series(&nu, &p, &f, 1e-9, 30)?;
    let oracle = volterra_oracle(&nu, &p, &f, grid)?;
    let rel = (r.kernel_value() - oracle).norm() / oracle.norm();
    // |S_{n+1} − S_n|
    let incr: Vec<f64> = r.partial_sums.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let decreasing = incr.windows(2).all(|w| w[1] < w[0]);
    let first_small = incr.iter().position(|d| *d < 1e-8).unwrap_or(usize::MAX);
    Ok(SuiteReport::new("series_vs_oracle", 1, rel, 1e-6)
        .with("truncation_order", r.truncation_order as f64, true)
        .with("certified_error", r.certified_error, r.certified_error < 1e-9)
        .with("first_order_increment_below_1e-8", first_small as f64, decreasing && first_small <= 6))
}

/// terms[n](c·ν) = cⁿ·terms[n](ν) for c ∈ {0.5, 2}, n ≤ 3.
pub fn homogeneity_suite() -> Result<SuiteReport> {
    let (nu, p) = sample_series_problem();
    let f = Forcing::zero();
    let base = DysonSolver::new(&nu, &p, &f, SeriesOptions::default())?.terms(3)?;
    let mut worst = 0.0f64;
    for c in [0.5, 2.0] {
        let scaled = DysonSolver::new(&nu.scaled(c), &p, &f, SeriesOptions::default())?.terms(3)?;
        for n in 0..=3 {
            let want = base[n] * c.powi(n as i32);
            worst = worst.max((scaled[n] - want).norm() / want.norm());
        }
    }
    Ok(SuiteReport::new("homogeneity", 8, worst, 1e-10))
}

/// Every suite, in a fixed order.
pub fn run_all(opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        schrodinger_suite(opts.seed)?,
        chapman_kolmogorov_suite(opts.seed)?,
        shift_invariance_suite(opts.seed)?,
        product_formula_suite(opts.seed)?,
        free_transform_suite(opts.seed)?,
        free_limit_suite(opts.seed)?,
        simplex_suite()?,
        growth_bound_suite(opts.seed)?,
        domination_suite()?,
        series_oracle_suite(opts.oracle_grid)?,
        homogeneity_suite()?,
    ])
}
