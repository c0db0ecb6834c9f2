//! Mode execution and the result document.

use oscprop_core::verify::{growth_bound_samples, run_all, GrowthSample, SuiteReport, VerifyOptions};
use oscprop_core::{
    free_kernel, harmonic_kernel, log_tail_bound_cn, marginals, propagator_series, BoundParams,
    Complex64, Error, MarginalSummary, SeriesResult,
};
use serde::{Deserialize, Serialize};

use crate::config::{Diagnostic, Mode, Resolved, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub x: f64,
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    pub phase: f64,
}

impl KernelRow {
    fn new(x: f64, t: f64, v: Complex64) -> Self {
        KernelRow {
            x,
            t,
            re: v.re,
            im: v.im,
            modulus: v.norm(),
            phase: v.arg(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelResults {
    pub kernel: Vec<KernelRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub x: f64,
    pub t: f64,
    pub series: SeriesResult,
    /// the perturbed forced kernel, partial sum divided by the prefactor
    pub propagator: KernelRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResults {
    pub measure: MarginalSummary,
    pub points: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResults {
    pub seed: u64,
    pub oracle_grid: usize,
    pub all_passed: bool,
    pub suites: Vec<SuiteReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub n: usize,
    pub c_n: f64,
    /// absent when C_n = 0
    pub log_c_n: Option<f64>,
    /// C_n / C_{n−1}; absent for n = 0 and when C_{n−1} = 0
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResults {
    pub params: BoundParams,
    pub measure: MarginalSummary,
    pub tail_bounds: Vec<TailRow>,
    pub growth_samples: Vec<GrowthSample>,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Results {
    Kernel(KernelResults),
    Series(SeriesResults),
    Verify(VerifyResults),
    Bounds(BoundsResults),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub oscprop: String,
    pub schema: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            oscprop: oscprop_core::VERSION.into(),
            schema: 1,
        }
    }
}

/// The complete output of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: Mode,
    pub config_echo: RunConfig,
    pub results: Results,
    pub diagnostics: Vec<Diagnostic>,
    pub versions: Versions,
}

/// How a run ended, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// bad configuration, or a verification suite outside its threshold
    Validation(String),
    /// the numerics gave up
    Numeric(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numeric(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "{m}"),
            Failure::Numeric(e) => write!(f, "{e}"),
        }
    }
}

fn numeric(e: Error) -> Failure {
    if e.is_numeric() {
        Failure::Numeric(e)
    } else {
        Failure::Validation(e.to_string())
    }
}

/// Validates and executes `config` in `mode`. A report is returned even when
/// a verification suite fails, so it can still be written.
pub fn execute(config: &RunConfig, mode: Mode) -> Result<(Report, Option<Failure>), Failure> {
    let (resolved, diagnostics) = config.resolve(mode);
    if let Some(first) = diagnostics.iter().find(|d| d.is_error()) {
        return Err(Failure::Validation(format!("{} (at `{}`)", first.message, first.field)));
    }
    let mut failure = None;
    let results = match (mode, resolved) {
        (Mode::Verify, _) => {
            let r = verify(config)?;
            if let Some(bad) = r.suites.iter().find(|s| !s.passed) {
                failure = Some(Failure::Validation(format!(
                    "InvariantViolated: suite {} has max defect {:e} against threshold {:e}",
                    bad.name, bad.max_defect, bad.threshold
                )));
            }
            Results::Verify(r)
        }
        (Mode::Kernel, Some(r)) => Results::Kernel(kernel(&r)?),
        (Mode::Series, Some(r)) => Results::Series(series(config, &r)?),
        (Mode::Bounds, Some(r)) => {
            let b = bounds(config, &r)?;
            if b.violations > 0 {
                failure = Some(Failure::Validation(format!(
                    "InvariantViolated: growth bound fails on {} of {} samples",
                    b.violations,
                    b.growth_samples.len()
                )));
            }
            Results::Bounds(b)
        }
        (_, None) => unreachable!("resolve yields domain objects for every error-free non-verify config"),
    };
    let report = Report {
        mode,
        config_echo: config.clone(),
        results,
        diagnostics,
        versions: Versions::default(),
    };
    Ok((report, failure))
}

fn kernel(r: &Resolved) -> Result<KernelResults, Failure> {
    let p = &r.problem;
    let f = r.test_function.forcing();
    let mut rows = Vec::with_capacity(r.points.len());
    for &(x, t) in &r.points {
        let q = p.between(p.x0, p.t0(), x, t).map_err(numeric)?;
        let v = if q.k == 0.0 {
            free_kernel(x, t, q.x0, q.t0(), &f)
        } else {
            harmonic_kernel(&q, &f)
        }
        .map_err(numeric)?;
        rows.push(KernelRow::new(x, t, v));
    }
    Ok(KernelResults { kernel: rows })
}

fn series(config: &RunConfig, r: &Resolved) -> Result<SeriesResults, Failure> {
    let p = &r.problem;
    let f = r.test_function.forcing();
    let tol = config.tolerances;
    let mut points = Vec::with_capacity(r.points.len());
    for &(x, t) in &r.points {
        let q = p.between(p.x0, p.t0(), x, t).map_err(numeric)?;
        let s = propagator_series(&r.measure, &q, &f, tol.tol, tol.max_order).map_err(numeric)?;
        let propagator = KernelRow::new(x, t, s.kernel_value());
        points.push(SeriesPoint {
            x,
            t,
            series: s,
            propagator,
        });
    }
    Ok(SeriesResults {
        measure: marginals(&r.measure),
        points,
    })
}

fn verify(config: &RunConfig) -> Result<VerifyResults, Failure> {
    let opts = VerifyOptions {
        seed: config.seed(),
        oracle_grid: config.verify.oracle_grid,
    };
    let suites = run_all(&opts).map_err(numeric)?;
    Ok(VerifyResults {
        seed: opts.seed,
        oracle_grid: opts.oracle_grid,
        all_passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

fn bounds(config: &RunConfig, r: &Resolved) -> Result<BoundsResults, Failure> {
    let p = &r.problem;
    let params = config.bound_params(&r.measure, p).map_err(numeric)?;
    let mut tail_bounds = Vec::with_capacity(config.tolerances.max_order + 1);
    let mut prev: Option<f64> = None;
    for n in 0..=config.tolerances.max_order {
        let ln = log_tail_bound_cn(n, &r.measure, p, &params).map_err(numeric)?;
        let log_c_n = ln.is_finite().then_some(ln);
        let ratio = match (prev, log_c_n) {
            (Some(a), Some(b)) => Some((b - a).exp()),
            _ => None,
        };
        tail_bounds.push(TailRow {
            n,
            c_n: ln.exp(),
            log_c_n,
            ratio,
        });
        prev = log_c_n;
    }
    let growth_samples = growth_bound_samples(
        p,
        &r.test_function,
        r.pins.as_ref(),
        config.seed(),
        config.bounds.samples,
    )
    .map_err(numeric)?;
    let violations = growth_samples.iter().filter(|s| !s.holds()).count();
    Ok(BoundsResults {
        params,
        measure: marginals(&r.measure),
        tail_bounds,
        growth_samples,
        violations,
    })
}
