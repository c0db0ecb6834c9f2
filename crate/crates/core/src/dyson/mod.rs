//! The perturbation series of pinned harmonic kernels against a signed
//! measure, its certified truncation, and an independent Volterra solver.

mod bounds;
mod oracle;
mod solver;

pub use bounds::{eq11_constant, log_tail_bound_cn, simplex_gamma_integral, tail_bound_cn, BoundParams};
pub use oracle::{volterra_iterates, volterra_oracle, volterra_report, VolterraReport};
pub use solver::{propagator_series, propagator_series_with, series_term, DysonSolver, SeriesOptions, SeriesResult};

#[cfg(test)]
mod tests;
