//! CSV and JSON rendering of a [`Report`].
//!
//! CSV numbers use 17 significant digits in lowercase scientific notation.
//! Modes with more than one table separate them by a blank line, each with
//! its own header row.

use std::fmt::Write;

use crate::config::Format;
use crate::run::{Report, Results};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

struct Table {
    out: String,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            out: header.join(",") + "\n",
        }
    }

    fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.out, "{}", cells.join(","));
    }
}

pub fn csv(report: &Report) -> String {
    let tables = match &report.results {
        Results::Kernel(r) => {
            let mut t = Table::new(&["x", "t", "re", "im", "modulus", "phase"]);
            for k in &r.kernel {
                t.row(&[num(k.x), num(k.t), num(k.re), num(k.im), num(k.modulus), num(k.phase)]);
            }
            vec![t]
        }
        Results::Series(r) => {
            let mut terms = Table::new(&[
                "x",
                "t",
                "order",
                "term_re",
                "term_im",
                "partial_sum_re",
                "partial_sum_im",
                "c_n",
            ]);
            let mut prop = Table::new(&[
                "x",
                "t",
                "re",
                "im",
                "modulus",
                "phase",
                "truncation_order",
                "certified_error",
            ]);
            for p in &r.points {
                let s = &p.series;
                for (n, (a, b)) in s.terms.iter().zip(&s.partial_sums).enumerate() {
                    terms.row(&[
                        num(p.x),
                        num(p.t),
                        n.to_string(),
                        num(a.re),
                        num(a.im),
                        num(b.re),
                        num(b.im),
                        opt(s.tail_bounds.get(n).copied()),
                    ]);
                }
                let k = &p.propagator;
                prop.row(&[
                    num(k.x),
                    num(k.t),
                    num(k.re),
                    num(k.im),
                    num(k.modulus),
                    num(k.phase),
                    s.truncation_order.to_string(),
                    num(s.certified_error),
                ]);
            }
            vec![terms, prop]
        }
        Results::Verify(r) => {
            let mut t = Table::new(&["suite", "quantity", "value", "threshold", "passed"]);
            for s in &r.suites {
                t.row(&[
                    s.name.clone(),
                    "max_defect".into(),
                    num(s.max_defect),
                    num(s.threshold),
                    s.passed.to_string(),
                ]);
                for (label, v) in &s.observed {
                    t.row(&[s.name.clone(), label.clone(), num(*v), String::new(), String::new()]);
                }
            }
            vec![t]
        }
        Results::Bounds(r) => {
            let mut cn = Table::new(&["n", "c_n", "log_c_n", "ratio"]);
            for row in &r.tail_bounds {
                cn.row(&[row.n.to_string(), num(row.c_n), opt(row.log_c_n), opt(row.ratio)]);
            }
            let mut g = Table::new(&["sample", "gamma", "z_re", "z_im", "pins", "lhs", "log_rhs", "holds"]);
            for (i, s) in r.growth_samples.iter().enumerate() {
                g.row(&[
                    i.to_string(),
                    num(s.gamma),
                    num(s.z.re),
                    num(s.z.im),
                    s.pins.len().to_string(),
                    num(s.lhs),
                    num(s.log_rhs),
                    s.holds().to_string(),
                ]);
            }
            vec![cn, g]
        }
    };
    tables.into_iter().map(|t| t.out).collect::<Vec<_>>().join("\n")
}

pub fn json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => csv(report),
        Format::Json => json(report),
    }
}
