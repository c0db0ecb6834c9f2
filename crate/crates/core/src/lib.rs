//! Propagators of the one-dimensional harmonic oscillator driven by a
//! linear source and perturbed by singular, time-dependent signed-measure
//! potentials.
//!
//! Units are fixed by ħ = m = 1. All complex square roots and logarithms
//! use the principal branch.

pub mod dyson;
pub mod error;
pub mod kernels;
pub mod measures;
pub mod numerics;
pub mod testfn;
pub mod transforms;
pub mod verify;

pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use dyson::{
    eq11_constant, log_tail_bound_cn, propagator_series, propagator_series_with, series_term,
    simplex_gamma_integral, tail_bound_cn, volterra_iterates, volterra_oracle, volterra_report,
    BoundParams, DysonSolver, SeriesOptions, SeriesResult, VolterraReport,
};
pub use error::{Error, Result};
pub use kernels::{
    chapman_kolmogorov_defect, free_kernel, harmonic_kernel, lemma42_defect,
    schrodinger_residual, KernelKind, OscillatorProblem, TimeWindow,
};
pub use measures::{
    check_condition_i, marginals, q_constant, MarginalSummary, MeasureComponent, SignedMeasure,
    SpatialPart, TemporalDensity,
};
pub use numerics::{
    complex_gaussian_integral, extract_quadratic, extract_quadratic_from_values, gauss_legendre,
    log_gamma, QuadraticCoefficients,
};
pub use testfn::{add_indicator_shift, Forcing, NormBundle, TestFunction};
pub use transforms::{
    characteristic_functional, donsker_s, donsker_t, growth_bound_check, log_growth_bound_check, pinned_t_transform,
    product_formula_check, s_from_t, t_transform_free, t_transform_harmonic, PinConfiguration,
};
