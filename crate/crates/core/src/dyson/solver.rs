use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{log_tail_bound_cn, BoundParams};
use crate::error::{Error, Result};
use crate::kernels::{
    leg_moments, log_kernel_from, log_kernel_tp, real_moments, Moments, OscillatorProblem, TimePoint,
    WindowIntegrals,
};
use crate::measures::{SignedMeasure, SpatialPart, TemporalDensity};
use crate::numerics::path::{interval_rule, Node, Singular};
use crate::numerics::{c, finite, rule, I};
use crate::testfn::Forcing;
use crate::transforms::t_transform_harmonic;

/// Discretization controls for [`DysonSolver`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    /// time cells on the coarse level
    pub cells: usize,
    /// collocation nodes per cell on the coarse level
    pub nodes: usize,
    /// Gauss nodes per piece of a spatial density
    pub density_nodes: usize,
    /// allowed coarse/fine disagreement, relative to |term 0|
    pub rel_tol: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            cells: 16,
            nodes: 10,
            density_nodes: 8,
            rel_tol: 1e-9,
        }
    }
}

/// Per-order terms of the series and its certified truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub terms: Vec<Complex64>,
    pub partial_sums: Vec<Complex64>,
    /// C_n for n = 0..=truncation_order (f ≡ 0 normalization)
    pub tail_bounds: Vec<f64>,
    pub truncation_order: usize,
    /// bound on Σ_{m > truncation_order} |terms[m]|, including the growth
    /// factor of the forcing
    pub certified_error: f64,
    /// |terms[truncation_order]|
    pub last_increment: f64,
    /// exp(‖f‖²(½ + π|Δ|/2 + L²/(2γ))); 1 at f ≡ 0
    pub growth_factor: f64,
    /// e^{−½|f_{Δᶜ}|²}·e^{i(x f(t) − x0 f(t0))}; dividing a partial sum by it
    /// gives the forced kernel itself
    pub prefactor: Complex64,
    pub bounds: Option<BoundParams>,
}

impl SeriesResult {
    pub fn value(&self) -> Complex64 {
        *self.partial_sums.last().expect("at least the zeroth term")
    }

    /// The perturbed forced kernel K_V^(f)(x,t|x0,t0).
    pub fn kernel_value(&self) -> Complex64 {
        self.value() / self.prefactor
    }
}

struct Source {
    pos: f64,
    parts: Vec<(f64, TemporalDensity)>,
}

impl Source {
    fn density(&self, s: f64) -> f64 {
        self.parts.iter().map(|(w, g)| w * g.value(s)).sum()
    }
}

fn sources(nu: &SignedMeasure, density_nodes: usize) -> Vec<Source> {
    let mut raw: Vec<(f64, f64, &TemporalDensity)> = Vec::new();
    let g = rule(density_nodes.max(1));
    for comp in &nu.components {
        if comp.coefficient == 0.0 {
            continue;
        }
        match &comp.spatial {
            SpatialPart::Atom(a) => raw.push((*a, comp.coefficient, &comp.temporal)),
            SpatialPart::Density { breakpoints, values } => {
                for (w, v) in breakpoints.windows(2).zip(values) {
                    if *v == 0.0 {
                        continue;
                    }
                    let (lo, hi) = (w[0], w[1]);
                    for (x, wt) in g.nodes.iter().zip(&g.weights) {
                        let y = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
                        raw.push((y, comp.coefficient * v * 0.5 * (hi - lo) * wt, &comp.temporal));
                    }
                }
            }
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<Source> = Vec::new();
    for (y, w, td) in raw {
        match out.last_mut() {
            Some(s) if s.pos == y => s.parts.push((w, td.clone())),
            _ => out.push(Source {
                pos: y,
                parts: vec![(w, td.clone())],
            }),
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    a: f64,
    b: f64,
    /// nodes and basis in σ = √((s − a)/(b − a)) instead of s
    graded: bool,
}

impl Cell {
    fn mid(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    fn point(&self, u: f64) -> f64 {
        let h = self.b - self.a;
        if self.graded {
            self.a + h * u * u
        } else {
            self.a + h * u
        }
    }

    fn local(&self, s: Complex64) -> Complex64 {
        let u = (s - self.a) / (self.b - self.a);
        if self.graded {
            u.sqrt()
        } else {
            u
        }
    }
}

/// Lagrange basis on fixed nodes in [0, 1], barycentric form.
struct Basis {
    u: Vec<f64>,
    lam: Vec<f64>,
}

impl Basis {
    fn new(p: usize) -> Self {
        let g = rule(p);
        let u: Vec<f64> = g.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect();
        let lam = (0..p)
            .map(|q| {
                let prod: f64 = (0..p).filter(|r| *r != q).map(|r| u[q] - u[r]).product();
                1.0 / prod
            })
            .collect();
        Basis { u, lam }
    }

    fn eval(&self, z: Complex64, out: &mut [Complex64]) {
        for (q, uq) in self.u.iter().enumerate() {
            if (z - uq).norm() < 1e-15 {
                out.iter_mut().for_each(|o| *o = c(0.0));
                out[q] = c(1.0);
                return;
            }
        }
        let mut den = c(0.0);
        for (q, o) in out.iter_mut().enumerate() {
            *o = self.lam[q] / (z - self.u[q]);
            den += *o;
        }
        out.iter_mut().for_each(|o| *o /= den);
    }
}

fn time_panels(nu: &SignedMeasure, p: &OscillatorProblem, f: &Forcing) -> Vec<f64> {
    let (t0, t) = (p.t0(), p.t());
    let mut b = vec![t0, t];
    for comp in &nu.components {
        b.extend(comp.temporal.breakpoints.iter().copied());
    }
    b.extend(f.breakpoints());
    b.retain(|s| *s >= t0 && *s <= t);
    b.sort_by(f64::total_cmp);
    let tiny = 1e-12 * (t - t0);
    b.dedup_by(|x, y| (*x - *y).abs() <= tiny);
    if let Some(last) = b.last_mut() {
        *last = t;
    }
    b[0] = t0;
    b
}

/// Cells of roughly equal length per panel. When some source sits away
/// from x0, χ has only an asymptotic expansion in (s − t0)/α at t0, so the
/// first cell is split geometrically down to a length of about 10⁻³·α.
fn make_cells(panels: &[f64], total: usize, alpha_min: f64) -> Vec<Cell> {
    let len = panels[panels.len() - 1] - panels[0];
    let mut cells = Vec::new();
    for (pi, w) in panels.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let m = ((total as f64 * (b - a) / len).round() as usize).max(1);
        let h = (b - a) / m as f64;
        for j in 0..m {
            let lo = a + j as f64 * h;
            let hi = if j + 1 == m { b } else { a + (j + 1) as f64 * h };
            if pi == 0 && j == 0 && alpha_min.is_finite() {
                let levels = (h / (1e-3 * alpha_min)).log2().ceil().clamp(0.0, 40.0) as i32;
                let mut edges: Vec<f64> = (0..=levels).rev().map(|l| lo + (hi - lo) * 0.5f64.powi(l)).collect();
                edges.insert(0, lo);
                *edges.last_mut().unwrap() = hi;
                for (k, e) in edges.windows(2).enumerate() {
                    cells.push(Cell {
                        a: e[0],
                        b: e[1],
                        graded: k == 0,
                    });
                }
                continue;
            }
            cells.push(Cell {
                a: lo,
                b: hi,
                graded: j == 0,
            });
        }
    }
    cells
}

struct Level {
    n: usize,
    w: Vec<Complex64>,
    fin: Vec<Complex64>,
}

#[derive(Default)]
struct FarSet {
    tps: Vec<TimePoint>,
    pre: Vec<Complex64>,
    ell: Vec<Complex64>,
    /// leg from each node to the cell anchor and the forcing at the node;
    /// empty when the forcing vanishes
    legs: Vec<(Moments, Complex64)>,
}

struct Setup<'a> {
    p: &'a OscillatorProblem,
    f: &'a Forcing,
    sources: &'a [Source],
    cells: Vec<Cell>,
    basis: Basis,
    /// real moments between consecutive cell anchors
    hops: Vec<Moments>,
}

impl Setup<'_> {
    fn new<'a>(
        p: &'a OscillatorProblem,
        f: &'a Forcing,
        sources: &'a [Source],
        cells: Vec<Cell>,
        nodes: usize,
    ) -> Setup<'a> {
        let hops = if f.is_zero() {
            Vec::new()
        } else {
            cells
                .windows(2)
                .map(|w| real_moments(f, p.k, w[0].mid(), w[1].mid()))
                .collect()
        };
        Setup {
            p,
            f,
            sources,
            cells,
            basis: Basis::new(nodes),
            hops,
        }
    }

    fn np(&self) -> usize {
        self.basis.u.len()
    }

    fn index(&self, pos: usize, cell: usize, q: usize) -> usize {
        (pos * self.cells.len() + cell) * self.np() + q
    }

    fn log_psi_in(&self, y: f64, s: TimePoint) -> Complex64 {
        log_kernel_tp(self.p.k, y, s, self.p.x0, TimePoint::real(self.p.t0()), self.f)
    }

    fn cell_rule(&self, src: &Source, cell: &Cell, hi: f64, right: Option<Singular>, out: &mut Vec<Node>) {
        let t0 = self.p.t0();
        let start = Singular {
            at: t0,
            alpha: 0.5 * (src.pos - self.p.x0).powi(2),
        };
        out.clear();
        if cell.graded && cell.a != t0 {
            let left = Some(Singular { at: cell.a, alpha: 0.0 });
            interval_rule(cell.a, hi, left, right, &[start], out);
        } else {
            interval_rule(cell.a, hi, Some(start), right, &[], out);
        }
    }

    /// Target-independent nodes of every (source, cell) pair, with
    /// weight·g·ψ_in and the basis values folded in.
    fn far_sets(&self) -> Vec<FarSet> {
        let np = self.np();
        let pairs: Vec<(usize, usize)> = (0..self.sources.len())
            .flat_map(|pi| (0..self.cells.len()).map(move |j| (pi, j)))
            .collect();
        pairs
            .into_par_iter()
            .map(|(pi, j)| {
                let (src, cell) = (&self.sources[pi], &self.cells[j]);
                let mut set = FarSet::default();
                let g = src.density(0.5 * (cell.a + cell.b));
                if g == 0.0 {
                    return set;
                }
                let mut nodes = Vec::new();
                self.cell_rule(src, cell, cell.b, None, &mut nodes);
                let anchor = 0.5 * (cell.a + cell.b);
                let mut ell = vec![c(0.0); np];
                for nd in &nodes {
                    let tp = TimePoint { z: nd.s, anchor };
                    set.tps.push(tp);
                    set.pre.push(nd.w * g * self.log_psi_in(src.pos, tp).exp());
                    if !self.f.is_zero() {
                        set.legs.push(leg_moments(self.f, self.p.k, tp));
                    }
                    self.basis.eval(cell.local(nd.s), &mut ell);
                    set.ell.extend_from_slice(&ell);
                }
                set
            })
            .collect()
    }

    /// One row of the integral operator: target (y, s_tgt), sources in
    /// cells 0..=last, divided by ψ_in(y, s_tgt) unless `fin`.
    fn row(&self, far: &[FarSet], y: f64, s_tgt: f64, last: usize, fin: bool, n: usize) -> Result<Vec<Complex64>> {
        let mut row = vec![c(0.0); n];
        let lin = if fin {
            c(0.0)
        } else {
            self.log_psi_in(y, TimePoint::real(s_tgt))
        };
        let np = self.np();
        let mut nodes: Vec<Node> = Vec::new();
        let mut ell = vec![c(0.0); np];
        let forced = !self.f.is_zero();
        let s_end = self.f.value(s_tgt);
        // real moments from each cell anchor to the target, swept backwards
        let mut reach: Vec<Option<Moments>> = vec![None; last + 1];
        for (pi, src) in self.sources.iter().enumerate() {
            let alpha_r = 0.5 * (y - src.pos).powi(2);
            let right = Some(Singular { at: s_tgt, alpha: alpha_r });
            for (j, cell) in self.cells.iter().enumerate().take(last + 1).rev() {
                let hi = cell.b.min(s_tgt);
                if !(hi > cell.a) {
                    continue;
                }
                let base = self.index(pi, j, 0);
                let len = cell.b - cell.a;
                let gap = s_tgt - cell.b;
                if gap >= len && alpha_r * (1.0 / gap - 1.0 / (s_tgt - cell.a)) <= 1.0 {
                    let set = &far[pi * self.cells.len() + j];
                    if set.tps.is_empty() {
                        continue;
                    }
                    let tail = if forced {
                        if reach[j].is_none() {
                            reach[j] = Some(match reach.get(j + 1).copied().flatten() {
                                Some(next) => self.hops[j].then(&next, self.p.k),
                                None => real_moments(self.f, self.p.k, cell.mid(), s_tgt),
                            });
                        }
                        reach[j]
                    } else {
                        None
                    };
                    for (k, tp) in set.tps.iter().enumerate() {
                        let lk = match tail {
                            Some(tail) => {
                                let (leg, s_start) = &set.legs[k];
                                let m = if leg.is_empty() { tail } else { leg.then(&tail, self.p.k) };
                                let w = WindowIntegrals::new(&m, *s_start, s_end);
                                log_kernel_from(self.p.k, y, src.pos, s_tgt - tp.z, &w)
                            }
                            None => log_kernel_tp(self.p.k, y, TimePoint::real(s_tgt), src.pos, *tp, self.f),
                        };
                        let val = set.pre[k] * (lk - lin).exp();
                        for (q, l) in set.ell[k * np..(k + 1) * np].iter().enumerate() {
                            row[base + q] += val * l;
                        }
                    }
                    continue;
                }
                let g = src.density(0.5 * (cell.a + cell.b));
                if g == 0.0 {
                    continue;
                }
                self.cell_rule(src, cell, hi, right, &mut nodes);
                let anchor = 0.5 * (cell.a + hi);
                for nd in &nodes {
                    let tp = TimePoint { z: nd.s, anchor };
                    let lk = log_kernel_tp(self.p.k, y, TimePoint::real(s_tgt), src.pos, tp, self.f);
                    let lp = self.log_psi_in(src.pos, tp);
                    let val = nd.w * g * (lk + lp - lin).exp();
                    self.basis.eval(cell.local(nd.s), &mut ell);
                    for (q, l) in ell.iter().enumerate() {
                        row[base + q] += val * l;
                    }
                }
            }
        }
        if row.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("series quadrature weight"));
        }
        Ok(row)
    }

    fn build(&self) -> Result<Level> {
        let np = self.np();
        let nc = self.cells.len();
        let n = self.sources.len() * nc * np;
        let far = self.far_sets();
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|r| {
                let q = r % np;
                let j = (r / np) % nc;
                let pi = r / (np * nc);
                let s = self.cells[j].point(self.basis.u[q]);
                self.row(&far, self.sources[pi].pos, s, j, false, n)
            })
            .collect::<Result<_>>()?;
        let fin = self.row(&far, self.p.x, self.p.t(), nc - 1, true, n)?;
        Ok(Level {
            n,
            w: rows.concat(),
            fin,
        })
    }
}

/// Nyström discretization of the recursive representation
/// φ_m(y,s) = −i∫∫ K_h(y,s|y′,s′) φ_{m−1}(y′,s′) ν(dy′,ds′),
/// carried in the ratio χ_m = φ_m/ψ_in at two resolutions.
pub struct DysonSolver {
    term0: Complex64,
    prefactor: Complex64,
    levels: [Level; 2],
    rel_tol: f64,
}

impl DysonSolver {
    pub fn new(nu: &SignedMeasure, p: &OscillatorProblem, f: &Forcing, opts: SeriesOptions) -> Result<Self> {
        p.validate()?;
        nu.validate()?;
        if opts.cells == 0 || opts.nodes < 2 || !(opts.rel_tol > 0.0) {
            return Err(Error::Domain(format!("unusable series options {opts:?}")));
        }
        let term0 = t_transform_harmonic(p, f)?;
        let prefactor = (-0.5 * f.sq_integral_outside(p.t0(), p.t())
            + I * (p.x * f.value(p.t()) - p.x0 * f.value(p.t0())))
        .exp();
        let src = sources(nu, opts.density_nodes);
        let panels = time_panels(nu, p, f);
        let alpha_min = src
            .iter()
            .map(|s| 0.5 * (s.pos - p.x0).powi(2))
            .filter(|a| *a > 0.0)
            .fold(f64::INFINITY, f64::min);
        let setup = |cells: usize, nodes: usize| Setup::new(p, f, &src, make_cells(&panels, cells, alpha_min), nodes);
        let coarse = setup(opts.cells, opts.nodes).build()?;
        let fine = setup(opts.cells + opts.cells.div_ceil(2), opts.nodes + 2).build()?;
        Ok(DysonSolver {
            term0,
            prefactor: finite(prefactor, "series prefactor")?,
            levels: [coarse, fine],
            rel_tol: opts.rel_tol,
        })
    }

    /// e^{−½|f_{Δᶜ}|²}·e^{i(x f(t) − x0 f(t0))}.
    pub fn prefactor(&self) -> Complex64 {
        self.prefactor
    }

    fn level_terms(&self, lv: &Level, max_order: usize) -> Vec<Complex64> {
        let mut out = vec![self.term0];
        let mut chi = vec![c(1.0); lv.n];
        let mut phase = c(1.0);
        for order in 1..=max_order {
            phase *= -I;
            let s: Complex64 = lv.fin.iter().zip(&chi).map(|(a, b)| a * b).sum();
            out.push(phase * self.prefactor * s);
            if order < max_order {
                chi = (0..lv.n)
                    .map(|r| lv.w[r * lv.n..(r + 1) * lv.n].iter().zip(&chi).map(|(a, b)| a * b).sum())
                    .collect();
            }
        }
        out
    }

    /// terms[0..=max_order] from the finer level, checked against the
    /// coarser one.
    pub fn terms(&self, max_order: usize) -> Result<Vec<Complex64>> {
        let a = self.level_terms(&self.levels[0], max_order);
        let b = self.level_terms(&self.levels[1], max_order);
        let tol = self.rel_tol * self.term0.norm();
        for (n, (x, y)) in a.iter().zip(&b).enumerate() {
            finite(*y, "series term")?;
            let d = (x - y).norm();
            if d > tol {
                return Err(Error::QuadratureNotConverged {
                    context: format!("series term of order {n}"),
                    difference: d,
                    tolerance: tol,
                });
            }
        }
        Ok(b)
    }
}

/// The n-th term of the series at f.
pub fn series_term(n: usize, nu: &SignedMeasure, p: &OscillatorProblem, f: &Forcing) -> Result<Complex64> {
    if n == 0 {
        p.validate()?;
        return t_transform_harmonic(p, f);
    }
    Ok(DysonSolver::new(nu, p, f, SeriesOptions::default())?.terms(n)?[n])
}

/// Sums the series until the certified tail is below `tol`.
pub fn propagator_series(
    nu: &SignedMeasure,
    p: &OscillatorProblem,
    f: &Forcing,
    tol: f64,
    max_order: usize,
) -> Result<SeriesResult> {
    propagator_series_with(nu, p, f, tol, max_order, SeriesOptions::default())
}

pub fn propagator_series_with(
    nu: &SignedMeasure,
    p: &OscillatorProblem,
    f: &Forcing,
    tol: f64,
    max_order: usize,
    opts: SeriesOptions,
) -> Result<SeriesResult> {
    p.validate()?;
    nu.validate()?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol must be positive, got {tol}")));
    }
    let prefactor_only = |terms: Vec<Complex64>| -> SeriesResult {
        let prefactor = (-0.5 * f.sq_integral_outside(p.t0(), p.t())
            + I * (p.x * f.value(p.t()) - p.x0 * f.value(p.t0())))
        .exp();
        let last_increment = terms.last().map_or(0.0, |z| z.norm());
        SeriesResult {
            partial_sums: partial_sums(&terms),
            terms,
            tail_bounds: Vec::new(),
            truncation_order: 0,
            certified_error: 0.0,
            last_increment,
            growth_factor: 1.0,
            prefactor,
            bounds: None,
        }
    };
    if nu.is_zero() {
        return Ok(prefactor_only(vec![t_transform_harmonic(p, f)?]));
    }
    let bp = BoundParams::default_for(nu, p)?;
    let growth = if f.is_zero() {
        1.0
    } else {
        bp.growth_factor(p, f.norm_bound(&p.window))
    };
    if !growth.is_finite() {
        return Err(Error::TailNotCertifiable("forcing growth factor overflows".into()));
    }
    // ln C_n up to one past the last order that could be needed
    let mut ln_c = Vec::with_capacity(max_order + 3);
    for n in 0..=max_order + 2 {
        ln_c.push(log_tail_bound_cn(n, nu, p, &bp)?);
    }
    let tail_after = |n: usize| -> f64 {
        let (a, b) = (ln_c[n + 1], ln_c[n + 2]);
        if a == f64::NEG_INFINITY {
            return 0.0;
        }
        let rho = (b - a).exp();
        if rho < 0.5 {
            growth * a.exp() / (1.0 - rho)
        } else {
            f64::INFINITY
        }
    };
    let order = (0..=max_order).find(|n| tail_after(*n) < tol);
    let n_eval = order.unwrap_or(max_order);
    let solver = DysonSolver::new(nu, p, f, opts)?;
    let terms = solver.terms(n_eval)?;
    let result = SeriesResult {
        partial_sums: partial_sums(&terms),
        last_increment: terms[n_eval].norm(),
        terms,
        tail_bounds: ln_c[..=n_eval].iter().map(|l| l.exp()).collect(),
        truncation_order: n_eval,
        certified_error: tail_after(n_eval),
        growth_factor: growth,
        prefactor: solver.prefactor(),
        bounds: Some(bp),
    };
    match order {
        Some(_) => Ok(result),
        None => Err(Error::MaxOrderExceeded(Box::new(result))),
    }
}

fn partial_sums(terms: &[Complex64]) -> Vec<Complex64> {
    terms
        .iter()
        .scan(c(0.0), |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect()
}
