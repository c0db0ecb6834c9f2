use thiserror::Error;

use crate::dyson::SeriesResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("DivergentIntegral: Re(a2) = {0} > 0")]
    DivergentIntegral(f64),
    #[error("DegenerateQuadratic: a2 = 0")]
    DegenerateQuadratic,
    #[error("NotQuadratic: check-point residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotQuadratic { residual: f64, tolerance: f64 },
    #[error("DomainError: {0}")]
    Domain(String),
    #[error("InvalidWindow: t = {t} must exceed t0 = {t0}")]
    InvalidWindow { t0: f64, t: f64 },
    #[error("FrequencyOutOfRange: k|Δ| = {product} ≥ π/2")]
    FrequencyOutOfRange { product: f64 },
    #[error("WindowNotContained: [{t0}, {t}] is not inside [{lo}, {hi})")]
    WindowNotContained { t0: f64, t: f64, lo: f64, hi: f64 },
    #[error("InvalidPins: {0}")]
    InvalidPins(String),
    #[error("InvalidTestFunction: {0}")]
    InvalidTestFunction(String),
    #[error("InvalidMeasure: {0}")]
    InvalidMeasure(String),
    #[error("QuadratureNotConverged: {context}: refinement difference {difference:.3e} > {tolerance:.3e}")]
    QuadratureNotConverged {
        context: String,
        difference: f64,
        tolerance: f64,
    },
    #[error("TailNotCertifiable: {0}")]
    TailNotCertifiable(String),
    #[error("MaxOrderExceeded: certified tail {:.3e} still above tolerance at order {}", .0.certified_error, .0.truncation_order)]
    MaxOrderExceeded(Box<SeriesResult>),
    #[error("SingularGrid: {0}")]
    SingularGrid(String),
    #[error("NonFinite: {0} produced a non-finite value")]
    NonFinite(&'static str),
}

impl Error {
    /// True for failures of the numerical machinery as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNotConverged { .. }
                | Error::MaxOrderExceeded(_)
                | Error::TailNotCertifiable(_)
                | Error::NonFinite(_)
                | Error::NotQuadratic { .. }
        )
    }
}
