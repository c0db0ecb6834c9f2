//! Batch front-end: configuration, execution and output of kernel, series,
//! verification and bound runs.

pub mod config;
pub mod output;
pub mod run;

pub use config::{Diagnostic, Format, Mode, RunConfig};
pub use run::{execute, Failure, Report};
