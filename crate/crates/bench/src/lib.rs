//! Fixtures shared by the benchmarks.

use oscprop_core::{OscillatorProblem, SignedMeasure, TestFunction};

/// ν = 0.2·δ0 ⊗ 1_Δ dt on Δ = [0, 0.5], k = 1, x0 = x = 0.3.
pub fn sample_series() -> (SignedMeasure, OscillatorProblem) {
    oscprop_core::verify::sample_series_problem()
}

/// A C¹ cubic with three pieces around [0, 1].
pub fn cubic() -> TestFunction {
    TestFunction::from_hermite(&[-0.5, 0.2, 0.5, 1.0], &[0.0, 0.3, -0.2, 0.0], &[0.0, 0.5, 1.0, 0.0])
        .expect("valid Hermite data")
}

pub fn oscillator() -> OscillatorProblem {
    OscillatorProblem::new(0.1, 0.9, 1.2, -0.3, 0.4).expect("admissible")
}
