use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{harmonic_kernel, log_kernel_tp, OscillatorProblem, TimePoint};
use crate::measures::{SignedMeasure, SpatialPart, TemporalDensity};
use crate::numerics::path::{interval_rule, Node, Singular};
use crate::numerics::{c, finite, rule, I};
use crate::testfn::Forcing;

const FAR_NODES: usize = 8;
const BLOCK: usize = 256;

/// Raw level values and the extrapolated result of the Volterra solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraReport {
    pub value: Complex64,
    /// (cells, value) per refinement level
    pub levels: Vec<(usize, Complex64)>,
    /// log₂ of the ratio of successive level differences
    pub observed_order: f64,
}

struct Slice<'a> {
    p: &'a OscillatorProblem,
    f: &'a Forcing,
    a: f64,
    parts: Vec<(f64, TemporalDensity)>,
}

fn single_atom(nu: &SignedMeasure) -> Result<(f64, Vec<(f64, TemporalDensity)>)> {
    let mut a: Option<f64> = None;
    let mut parts = Vec::new();
    for comp in &nu.components {
        match comp.spatial {
            SpatialPart::Atom(y) => {
                if a.is_some_and(|b| b != y) {
                    return Err(Error::InvalidMeasure(
                        "the Volterra oracle needs a single spatial atom".into(),
                    ));
                }
                a = Some(y);
                parts.push((comp.coefficient, comp.temporal.clone()));
            }
            SpatialPart::Density { .. } => {
                return Err(Error::InvalidMeasure(
                    "the Volterra oracle needs a single spatial atom".into(),
                ))
            }
        }
    }
    Ok((a.unwrap_or(0.0), parts))
}

struct LevelOut {
    value: Complex64,
    iterates: Vec<Complex64>,
}

impl Slice<'_> {
    fn g(&self, s: f64) -> f64 {
        self.parts.iter().map(|(w, td)| w * td.value(s)).sum()
    }

    fn log_psi_in(&self, y: f64, s: TimePoint) -> Complex64 {
        log_kernel_tp(self.p.k, y, s, self.p.x0, TimePoint::real(self.p.t0()), self.f)
    }

    /// ∫_{lo}^{hi} g(s′) K(y,s_tgt|a,s′) ψ_in(a,s′) ds′ · e^{−lin}, by the
    /// singular-endpoint rule.
    fn exact_weight(&self, lo: f64, hi: f64, y: f64, s_tgt: f64, lin: Complex64, nodes: &mut Vec<Node>) -> Complex64 {
        let t0 = self.p.t0();
        nodes.clear();
        let left = Singular {
            at: t0,
            alpha: 0.5 * (self.a - self.p.x0).powi(2),
        };
        let right = Singular {
            at: s_tgt,
            alpha: 0.5 * (y - self.a).powi(2),
        };
        interval_rule(lo, hi, Some(left), Some(right), &[], nodes);
        let anchor = 0.5 * (lo + hi);
        let mut acc = c(0.0);
        for nd in nodes.iter() {
            let g = self.g(nd.anchor);
            if g == 0.0 {
                continue;
            }
            let tp = TimePoint { z: nd.s, anchor };
            let lk = log_kernel_tp(self.p.k, y, TimePoint::real(s_tgt), self.a, tp, self.f);
            acc += nd.w * g * (lk + self.log_psi_in(self.a, tp) - lin).exp();
        }
        acc
    }

    fn solve(&self, n: usize, orders: usize) -> Result<LevelOut> {
        let (t0, t) = (self.p.t0(), self.p.t());
        let h = (t - t0) / n as f64;
        let mid = |i: usize| t0 + (i as f64 + 0.5) * h;
        if mid(0) <= t0 || mid(n - 1) >= t {
            return Err(Error::SingularGrid(format!("{n} cells do not separate t0 and t")));
        }
        let gl = rule(FAR_NODES);
        let offs: Vec<f64> = gl.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect();
        let alpha0 = 0.5 * (self.a - self.p.x0).powi(2);
        let alpha_fin = 0.5 * (self.p.x - self.a).powi(2);

        // per-node data of the far rule
        let node_s = |j: usize, q: usize| t0 + (j as f64 + offs[q]) * h;
        // ψ_in·g·weight at the far-rule nodes
        let far: Vec<Complex64> = (0..n * FAR_NODES)
            .into_par_iter()
            .map(|r| {
                let (j, q) = (r / FAR_NODES, r % FAR_NODES);
                let s = node_s(j, q);
                let lp = self.log_psi_in(self.a, TimePoint::real(s));
                0.5 * h * gl.weights[q] * self.g(s) * lp.exp()
            })
            .collect();
        let lpsi_mid: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|i| self.log_psi_in(self.a, TimePoint::real(mid(i))))
            .collect();
        // translation-invariant kernel table, valid at f ≡ 0
        let toeplitz: Option<Vec<Complex64>> = self.f.is_zero().then(|| {
            (0..n * FAR_NODES)
                .into_par_iter()
                .map(|r| {
                    let (d, q) = (r / FAR_NODES, r % FAR_NODES);
                    let lag = (d as f64 + 0.5 - offs[q]) * h;
                    log_kernel_tp(self.p.k, self.a, TimePoint::real(lag), self.a, TimePoint::real(0.0), self.f).exp()
                })
                .collect()
        });

        let near_left = |j: usize| j == 0 || alpha0 * h / ((j as f64 * h) * ((j + 1) as f64 * h)) > 0.5;
        let row = |i: usize, nodes: &mut Vec<Node>| -> Vec<Complex64> {
            let lin = lpsi_mid[i];
            let inv_psi = (-lin).exp();
            let s_tgt = mid(i);
            (0..=i)
                .map(|j| {
                    if near_left(j) || j + 3 > i {
                        let lo = t0 + j as f64 * h;
                        let hi = (t0 + (j + 1) as f64 * h).min(s_tgt);
                        return self.exact_weight(lo, hi, self.a, s_tgt, lin, nodes);
                    }
                    let src = &far[j * FAR_NODES..(j + 1) * FAR_NODES];
                    match &toeplitz {
                        Some(tab) => {
                            let ks = &tab[(i - j) * FAR_NODES..(i - j + 1) * FAR_NODES];
                            src.iter().zip(ks).map(|(w, k)| w * k).sum::<Complex64>() * inv_psi
                        }
                        None => src
                            .iter()
                            .enumerate()
                            .map(|(q, w)| {
                                let lk = log_kernel_tp(
                                    self.p.k,
                                    self.a,
                                    TimePoint::real(s_tgt),
                                    self.a,
                                    TimePoint::real(node_s(j, q)),
                                    self.f,
                                );
                                w * (lk - lin).exp()
                            })
                            .sum(),
                    }
                })
                .collect()
        };
        let fin: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map_init(Vec::new, |nodes, j| {
                let lo = t0 + j as f64 * h;
                let hi = lo + h;
                let pv = alpha_fin * h / ((t - hi).max(0.0) * (t - lo));
                if near_left(j) || j + 3 > n || pv > 0.5 {
                    let hi = if j + 1 == n { t } else { hi };
                    return self.exact_weight(lo, hi, self.p.x, t, c(0.0), nodes);
                }
                far[j * FAR_NODES..(j + 1) * FAR_NODES]
                    .iter()
                    .enumerate()
                    .map(|(q, w)| {
                        let lk = log_kernel_tp(
                            self.p.k,
                            self.p.x,
                            TimePoint::real(t),
                            self.a,
                            TimePoint::real(node_s(j, q)),
                            self.f,
                        );
                        w * lk.exp()
                    })
                    .sum()
            })
            .collect();

        // forward substitution, with the Picard iterates in the same pass
        let mut chi = vec![c(0.0); n];
        let mut pic = vec![vec![c(0.0); n]; orders];
        let mut start = 0;
        while start < n {
            let end = (start + BLOCK).min(n);
            let rows: Vec<Vec<Complex64>> = (start..end)
                .into_par_iter()
                .map_init(Vec::new, |nodes, i| row(i, nodes))
                .collect();
            for (i, v) in (start..end).zip(&rows) {
                let s: Complex64 = v[..i].iter().zip(&chi[..i]).map(|(a, b)| a * b).sum();
                chi[i] = (1.0 - I * s) / (1.0 + I * v[i]);
                for m in 0..orders {
                    let val = if m == 0 {
                        v.iter().sum()
                    } else {
                        v.iter().zip(&pic[m - 1][..=i]).map(|(a, b)| a * b).sum()
                    };
                    pic[m][i] = val;
                }
            }
            start = end;
        }
        let k_h = harmonic_kernel(self.p, self.f)?;
        let dot = |x: &[Complex64]| -> Complex64 { fin.iter().zip(x).map(|(a, b)| a * b).sum() };
        let value = finite(k_h - I * dot(&chi), "Volterra solution")?;
        let mut iterates = vec![k_h];
        let mut phase = c(1.0);
        let ones = vec![c(1.0); n];
        for m in 0..orders {
            phase *= -I;
            let prev: &[Complex64] = if m == 0 { &ones } else { &pic[m - 1] };
            iterates.push(phase * dot(prev));
        }
        Ok(LevelOut { value, iterates })
    }
}

// one Richardson step on the two finest levels, with the observed order
// clamped to [1, 2]
fn extrapolate(v: [Complex64; 3]) -> (Complex64, f64) {
    let (d1, d2) = ((v[0] - v[1]).norm(), (v[1] - v[2]).norm());
    if d2 == 0.0 {
        return (v[2], f64::INFINITY);
    }
    let order = (d1 / d2).log2();
    let r = 2f64.powf(if order.is_nan() { 1.0 } else { order.clamp(1.0, 2.0) });
    (v[2] + (v[2] - v[1]) / (r - 1.0), order)
}

fn prepare<'a>(nu: &SignedMeasure, p: &'a OscillatorProblem, f: &'a Forcing, grid: usize) -> Result<Slice<'a>> {
    p.validate()?;
    nu.validate()?;
    if grid < 100 {
        return Err(Error::Domain(format!("grid must be at least 100, got {grid}")));
    }
    let (a, parts) = single_atom(nu)?;
    Ok(Slice { p, f, a, parts })
}

/// Solves the Volterra equation on grid, 2·grid and 4·grid cells and
/// extrapolates.
pub fn volterra_report(nu: &SignedMeasure, p: &OscillatorProblem, f: &Forcing, grid: usize) -> Result<VolterraReport> {
    let sl = prepare(nu, p, f, grid)?;
    if sl.parts.iter().all(|(w, _)| *w == 0.0) {
        let v = harmonic_kernel(p, f)?;
        return Ok(VolterraReport {
            value: v,
            levels: vec![(grid, v)],
            observed_order: f64::INFINITY,
        });
    }
    let mut levels = Vec::new();
    for m in [1, 2, 4] {
        levels.push((grid * m, sl.solve(grid * m, 0)?.value));
    }
    let (value, observed_order) = extrapolate([levels[0].1, levels[1].1, levels[2].1]);
    Ok(VolterraReport {
        value,
        levels,
        observed_order,
    })
}

/// K_V(x,t|x0,t0) for ν = δ_a ⊗ g(t)dt, extrapolated from three grids.
pub fn volterra_oracle(nu: &SignedMeasure, p: &OscillatorProblem, f: &Forcing, grid: usize) -> Result<Complex64> {
    Ok(volterra_report(nu, p, f, grid)?.value)
}

/// Picard iterates of the same discretization: entry n is the order-n
/// term of the kernel expansion, without the forcing prefactor.
pub fn volterra_iterates(
    nu: &SignedMeasure,
    p: &OscillatorProblem,
    f: &Forcing,
    grid: usize,
    max_order: usize,
) -> Result<Vec<Complex64>> {
    let sl = prepare(nu, p, f, grid)?;
    let runs: Vec<Vec<Complex64>> = [1, 2, 4]
        .iter()
        .map(|m| sl.solve(grid * m, max_order).map(|o| o.iterates))
        .collect::<Result<_>>()?;
    Ok((0..=max_order)
        .map(|n| extrapolate([runs[0][n], runs[1][n], runs[2][n]]).0)
        .collect())
}
