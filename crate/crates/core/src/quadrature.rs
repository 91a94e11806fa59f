//! Node/weight sets for integrating over a pulse.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Composite trapezoid on equally spaced nodes, endpoints included.
    Trapezoid,
    /// Composite Gauss–Legendre with `order` nodes per panel.
    GaussLegendre { order: usize },
}

impl QuadratureRule {
    pub fn name(&self) -> &'static str {
        match self {
            QuadratureRule::Trapezoid => "trapezoid",
            QuadratureRule::GaussLegendre { .. } => "gauss-legendre",
        }
    }
}

/// Nodes and weights for `∫_a^b f(t) dt ≈ Σ w_i f(t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub rule: QuadratureRule,
}

impl QuadratureGrid {
    /// Grid with roughly `count` nodes (rounded up to whole panels for
    /// Gauss–Legendre; at least two nodes for the trapezoid).
    pub fn new(rule: QuadratureRule, start: f64, end: f64, count: usize) -> Self {
        match rule {
            QuadratureRule::Trapezoid => {
                let n = count.max(2);
                let h = (end - start) / (n - 1) as f64;
                let nodes = (0..n).map(|i| start + h * i as f64).collect();
                let mut weights = vec![h; n];
                weights[0] = 0.5 * h;
                weights[n - 1] = 0.5 * h;
                Self { nodes, weights, rule }
            }
            QuadratureRule::GaussLegendre { order } => {
                let order = order.max(1);
                let panels = count.div_ceil(order).max(1);
                let (x, w) = gauss_legendre(order);
                let h = (end - start) / panels as f64;
                let mut nodes = Vec::with_capacity(panels * order);
                let mut weights = Vec::with_capacity(panels * order);
                for p in 0..panels {
                    let mid = start + h * (p as f64 + 0.5);
                    for (xi, wi) in x.iter().zip(&w) {
                        nodes.push(mid + 0.5 * h * xi);
                        weights.push(0.5 * h * wi);
                    }
                }
                Self { nodes, weights, rule }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
