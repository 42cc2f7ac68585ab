//! One-dimensional quadrature rules used to build tensor-product grids.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Quadrature rule applied independently along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Rule {
    /// Composite trapezoid; `resolution` is the number of nodes.
    Trapezoid,
    /// Composite Gauss-Legendre; `resolution` is the number of panels, each
    /// carrying `points` nodes.
    GaussLegendre { points: usize },
}

impl Default for Rule {
    fn default() -> Self {
        Rule::Trapezoid
    }
}

impl Rule {
    /// Algebraic convergence order in the panel width for smooth integrands.
    pub fn order(&self) -> u32 {
        match self {
            Rule::Trapezoid => 2,
            Rule::GaussLegendre { points } => 2 * (*points as u32),
        }
    }

    /// Resolution that halves the node spacing (or panel width).
    pub fn refined(&self, resolution: usize) -> usize {
        match self {
            Rule::Trapezoid => 2 * resolution - 1,
            Rule::GaussLegendre { .. } => 2 * resolution,
        }
    }

    pub fn min_resolution(&self) -> usize {
        match self {
            Rule::Trapezoid => 2,
            Rule::GaussLegendre { .. } => 1,
        }
    }
}

/// Nodes and weights along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisRule {
    pub fn new(lo: f64, hi: f64, resolution: usize, rule: Rule) -> Self {
        match rule {
            Rule::Trapezoid => trapezoid(lo, hi, resolution),
            Rule::GaussLegendre { points } => gauss_legendre_panels(lo, hi, resolution, points),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect::<super::NeumaierSum>()
            .value()
    }
}

fn trapezoid(lo: f64, hi: f64, n: usize) -> AxisRule {
    assert!(n >= 2, "trapezoid rule needs at least two nodes");
    let h = (hi - lo) / (n - 1) as f64;
    let nodes = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + h * i as f64 })
        .collect();
    let weights = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect();
    AxisRule { nodes, weights }
}

fn gauss_legendre_panels(lo: f64, hi: f64, panels: usize, points: usize) -> AxisRule {
    assert!(panels >= 1 && points >= 1);
    let (x, w) = gauss_legendre(points);
    let width = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * points);
    let mut weights = Vec::with_capacity(panels * points);
    for p in 0..panels {
        let a = lo + width * p as f64;
        let mid = a + 0.5 * width;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * width * xi);
            weights.push(0.5 * width * wi);
        }
    }
    AxisRule { nodes, weights }
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Richardson error estimate from a coarse and a refined result of a rule of
/// the given order (spacing ratio 2).
pub fn richardson_error(coarse: f64, fine: f64, order: u32) -> f64 {
    (fine - coarse).abs() / (2f64.powi(order as i32) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn trapezoid_error_scales_quadratically() {
        let f = |x: f64| x.exp();
        let exact = 1f64.exp() - 1.0;
        let e1 = (AxisRule::new(0.0, 1.0, 9, Rule::Trapezoid).integrate(f) - exact).abs();
        let e2 = (AxisRule::new(0.0, 1.0, 17, Rule::Trapezoid).integrate(f) - exact).abs();
        assert!((e1 / e2 - 4.0).abs() < 0.05);
    }

    #[test]
    fn richardson_estimate_tracks_trapezoid_error() {
        let f = |x: f64| (3.0 * x).sin();
        let exact = (1.0 - 3f64.cos()) / 3.0;
        let c = AxisRule::new(0.0, 1.0, 11, Rule::Trapezoid).integrate(f);
        let fi = AxisRule::new(0.0, 1.0, Rule::Trapezoid.refined(11), Rule::Trapezoid).integrate(f);
        let est = richardson_error(c, fi, 2);
        let err = (fi - exact).abs();
        assert!((est / err - 1.0).abs() < 0.05);
    }
}
