//! Run configuration (TOML) and its validation.

use std::path::PathBuf;

use clap::ValueEnum;
use oscprop_core::{
    marginals, BoundParams, Error, MeasureComponent, OscillatorProblem, PinConfiguration, SignedMeasure,
    TestFunction,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Kernel,
    Series,
    Verify,
    Bounds,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Kernel => "kernel",
            Mode::Series => "series",
            Mode::Verify => "verify",
            Mode::Bounds => "bounds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// optional; must agree with the subcommand when present
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillator: Option<Oscillator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_function: Option<TestFunctionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSection>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oscillator {
    pub t0: f64,
    pub t: f64,
    #[serde(default)]
    pub k: f64,
    pub x0: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSection {
    pub breakpoints: Vec<f64>,
    /// per interval, c0 + c1·s + c2·s² + c3·s³ with s measured from the
    /// interval's left breakpoint
    pub coefficients: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    #[serde(default)]
    pub components: Vec<MeasureComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { from: f64, to: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { from, to, points } => match points {
                0 => Vec::new(),
                1 => vec![*from],
                n => (0..*n)
                    .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    /// defaults to the oscillator's x
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Grid>,
    /// defaults to the oscillator's t
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Grid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_order")]
    pub max_order: usize,
}

fn default_tol() -> f64 {
    1e-9
}

fn default_max_order() -> usize {
    30
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol: default_tol(),
            max_order: default_max_order(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    /// defaults to min(β/(2q), 1)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// growth-bound samples
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// fixed pins (t_j, x_j) for the growth-bound samples; random otherwise
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pins: Option<Vec<(f64, f64)>>,
}

fn default_samples() -> usize {
    20
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection {
            gamma: None,
            q: None,
            samples: default_samples(),
            pins: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "default_oracle_grid")]
    pub oracle_grid: usize,
}

fn default_oracle_grid() -> usize {
    2000
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            oracle_grid: default_oracle_grid(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    /// dotted path of the offending field
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn error(field: &str, e: &Error) -> Self {
        let text = e.to_string();
        let code = text.split(':').next().unwrap_or("Error").to_string();
        Diagnostic {
            severity: Severity::Error,
            code,
            field: field.into(),
            message: text,
        }
    }

    fn plain(severity: Severity, code: &str, field: &str, message: String) -> Self {
        Diagnostic {
            severity,
            code: code.into(),
            field: field.into(),
            message: format!("{code}: {message}"),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {} (at `{}`)", self.message, self.field)
    }
}

/// Parses a TOML document; errors carry line and column.
pub fn parse(text: &str) -> Result<RunConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

/// Domain objects built from a configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub problem: OscillatorProblem,
    pub test_function: TestFunction,
    pub measure: SignedMeasure,
    pub pins: Option<PinConfiguration>,
    /// (x, t) evaluation points
    pub points: Vec<(f64, f64)>,
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Every violated constraint for `mode`; runs no numerics beyond
    /// construction checks.
    pub fn validate(&self, mode: Mode) -> Vec<Diagnostic> {
        self.resolve(mode).1
    }

    /// Domain objects for `mode` (none for verify, or when any diagnostic
    /// is an error) together with all diagnostics.
    pub fn resolve(&self, mode: Mode) -> (Option<Resolved>, Vec<Diagnostic>) {
        let mut d = Vec::new();
        if let Some(m) = self.mode {
            if m != mode {
                d.push(Diagnostic::plain(
                    Severity::Error,
                    "ModeMismatch",
                    "mode",
                    format!("config says {} but the command is {}", m.name(), mode.name()),
                ));
            }
        }
        let tol = &self.tolerances;
        if !(tol.tol > 0.0 && tol.tol.is_finite()) {
            d.push(Diagnostic::plain(
                Severity::Error,
                "DomainError",
                "tolerances.tol",
                format!("tol must be positive and finite, got {}", tol.tol),
            ));
        }
        if tol.max_order == 0 {
            d.push(Diagnostic::plain(
                Severity::Error,
                "DomainError",
                "tolerances.max_order",
                "max_order must be at least 1".into(),
            ));
        }
        if mode == Mode::Verify {
            if self.verify.oracle_grid < 100 {
                d.push(Diagnostic::plain(
                    Severity::Error,
                    "DomainError",
                    "verify.oracle_grid",
                    format!("oracle_grid must be at least 100, got {}", self.verify.oracle_grid),
                ));
            }
            return (None, d);
        }
        let Some(o) = self.oscillator else {
            d.push(Diagnostic::plain(
                Severity::Error,
                "MissingSection",
                "oscillator",
                format!("mode {} needs an [oscillator] section", mode.name()),
            ));
            return (None, d);
        };
        let problem = match OscillatorProblem::new(o.t0, o.t, o.k, o.x0, o.x) {
            Ok(p) => p,
            Err(e) => {
                let field = match e {
                    Error::InvalidWindow { .. } => "oscillator.t",
                    Error::FrequencyOutOfRange { .. } => "oscillator.k",
                    _ => "oscillator",
                };
                d.push(Diagnostic::error(field, &e));
                return (None, d);
            }
        };
        let test_function = match &self.test_function {
            None => TestFunction::zero(),
            Some(tf) => match TestFunction::new(tf.breakpoints.clone(), tf.coefficients.clone()) {
                Ok(f) => f,
                Err(e) => {
                    d.push(Diagnostic::error("test_function", &e));
                    TestFunction::zero()
                }
            },
        };
        let components = self.measure.as_ref().map(|m| m.components.clone()).unwrap_or_default();
        let measure = match SignedMeasure::new(components, problem.window) {
            Ok(nu) => nu,
            Err(e) => {
                d.push(Diagnostic::error("measure.components", &e));
                SignedMeasure::zero(problem.window)
            }
        };
        if !d.iter().any(Diagnostic::is_error) {
            // the series certifies with the default parameters; [bounds] only
            // steers the bounds table
            let params = match mode {
                Mode::Series => Some(BoundParams::default_for(&measure, &problem)),
                Mode::Bounds => Some(self.bound_params(&measure, &problem)),
                _ => None,
            };
            if let Some(Err(e)) = params {
                d.push(Diagnostic::error("bounds", &e));
            }
        }
        let pins = self.bounds.pins.as_ref().map(|v| PinConfiguration::new(v.clone()));
        if let (Mode::Bounds, Some(pins)) = (mode, &pins) {
            if let Err(e) = pins.validate(&problem) {
                d.push(Diagnostic::error("bounds.pins", &e));
            } else if let Some(w) = pins.spatial_order_warning(&problem) {
                d.push(Diagnostic::plain(Severity::Warning, "PinOrder", "bounds.pins", w));
            }
        }
        let points = self.points(&problem, mode, &mut d);
        if d.iter().any(Diagnostic::is_error) {
            return (None, d);
        }
        let r = Resolved {
            problem,
            test_function,
            measure,
            pins,
            points,
        };
        (Some(r), d)
    }

    pub fn bound_params(&self, nu: &SignedMeasure, p: &OscillatorProblem) -> oscprop_core::Result<BoundParams> {
        match (self.bounds.gamma, self.bounds.q) {
            (None, None) => BoundParams::default_for(nu, p),
            (g, q) => {
                let q = q.unwrap_or(BoundParams::DEFAULT_Q);
                // same default as BoundParams::default_for, at this q
                let gamma = g.unwrap_or_else(|| {
                    marginals(nu)
                        .gaussian_tail_beta
                        .map_or(1.0, |beta| (beta / (2.0 * q)).min(1.0))
                });
                BoundParams::new(nu, p, gamma, q)
            }
        }
    }

    fn points(&self, p: &OscillatorProblem, mode: Mode, d: &mut Vec<Diagnostic>) -> Vec<(f64, f64)> {
        if mode == Mode::Bounds {
            return vec![(p.x, p.t())];
        }
        if mode == Mode::Series && self.grids.t.is_some() {
            d.push(Diagnostic::plain(
                Severity::Error,
                "GridNotSupported",
                "grids.t",
                "series mode evaluates at the window end; set oscillator.t instead".into(),
            ));
        }
        let xs = self.grids.x.as_ref().map_or(vec![p.x], Grid::values);
        let ts = self.grids.t.as_ref().map_or(vec![p.t()], Grid::values);
        for (name, v) in [("grids.x", &xs), ("grids.t", &ts)] {
            if v.is_empty() {
                d.push(Diagnostic::plain(Severity::Error, "EmptyGrid", name, "grid has no points".into()));
            }
        }
        for (i, x) in xs.iter().enumerate() {
            if !x.is_finite() {
                d.push(Diagnostic::plain(
                    Severity::Error,
                    "DomainError",
                    &format!("grids.x[{i}]"),
                    format!("x = {x} is not finite"),
                ));
            }
        }
        for (i, t) in ts.iter().enumerate() {
            if let Err(e) = p.between(p.x0, p.t0(), p.x, *t) {
                d.push(Diagnostic::error(&format!("grids.t[{i}]"), &e));
            }
        }
        let mut pts = Vec::with_capacity(xs.len() * ts.len());
        for t in &ts {
            for x in &xs {
                pts.push((*x, *t));
            }
        }
        pts
    }
}
