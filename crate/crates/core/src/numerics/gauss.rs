use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    // returns (P_n(x), P_n'(x))
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Apply the rule on [a, b].
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let h = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(mid + h * x);
        }
        acc * h
    }
}

/// Shared rule of a given order.
pub(crate) fn rule(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("rule cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
        .clone()
}

/// Fixed-order Gauss–Legendre panel rule for ∫_a^b f.
pub fn gauss_legendre<F: FnMut(f64) -> Complex64>(f: F, a: f64, b: f64, nodes: usize) -> Complex64 {
    rule(nodes).integrate(a, b, f)
}

/// Spectral indefinite-integration matrix on the Gauss–Legendre nodes:
/// `m[q][r]` = ∫_{−1}^{x_q} ℓ_r(x) dx with ℓ_r the Lagrange basis.
pub(crate) struct IntegrationMatrix {
    pub rule: Arc<GaussLegendre>,
    pub m: Vec<Vec<f64>>,
}

impl IntegrationMatrix {
    pub fn shared(n: usize) -> Arc<IntegrationMatrix> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<IntegrationMatrix>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("matrix cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(IntegrationMatrix::build(n)))
            .clone()
    }

    fn build(n: usize) -> Self {
        let rule = rule(n);
        // Legendre values P_j at all nodes, j = 0..=n
        let pvals = |x: f64| {
            let mut p = vec![0.0; n + 1];
            p[0] = 1.0;
            if n >= 1 {
                p[1] = x;
            }
            for j in 2..=n {
                let jf = j as f64;
                p[j] = ((2.0 * jf - 1.0) * x * p[j - 1] - (jf - 1.0) * p[j - 2]) / jf;
            }
            p
        };
        let at_nodes: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| pvals(x)).collect();
        let mut m = vec![vec![0.0; n]; n];
        for q in 0..n {
            let y = rule.nodes[q];
            let py = &at_nodes[q];
            // ∫_{−1}^{y} P_j
            let mut ip = vec![0.0; n];
            ip[0] = y + 1.0;
            for j in 1..n {
                ip[j] = (py[j + 1] - py[j - 1]) / (2.0 * j as f64 + 1.0);
            }
            for r in 0..n {
                let pr = &at_nodes[r];
                let mut s = 0.0;
                for j in 0..n {
                    s += (2.0 * j as f64 + 1.0) * 0.5 * pr[j] * ip[j];
                }
                m[q][r] = rule.weights[r] * s;
            }
        }
        IntegrationMatrix { rule, m }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 33] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n} s={s}");
        }
    }

    #[test]
    fn examples() {
        let v = gauss_legendre(|x| Complex64::new(x * x, 0.0), 0.0, 1.0, 2);
        assert!((v.re - 1.0 / 3.0).abs() < 1e-15);
        let v = gauss_legendre(|x| Complex64::new(x.cos(), 0.0), 0.0, 1.0, 8);
        assert!((v.re - 1f64.sin()).abs() < 1e-12);
        let v = gauss_legendre(|x| Complex64::new(x.sin(), 0.0), 0.0, std::f64::consts::PI, 16);
        assert!((v.re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_up_to_degree_2n_minus_1() {
        let n = 6;
        for d in 0..(2 * n) {
            let v = gauss_legendre(|x| Complex64::new(x.powi(d as i32), 0.0), 0.0, 1.0, n);
            assert!((v.re - 1.0 / (d as f64 + 1.0)).abs() < 1e-14, "degree {d}");
        }
    }

    #[test]
    fn integration_matrix_integrates_polynomials() {
        let im = IntegrationMatrix::shared(16);
        for d in 0..15 {
            for (q, &y) in im.rule.nodes.iter().enumerate() {
                let s: f64 = (0..16).map(|r| im.m[q][r] * im.rule.nodes[r].powi(d)).sum();
                let exact = (y.powi(d + 1) - (-1f64).powi(d + 1)) / (d as f64 + 1.0);
                assert!((s - exact).abs() < 1e-13, "d={d} q={q}");
            }
        }
    }
}
