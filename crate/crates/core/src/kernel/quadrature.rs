//! Fixed-node Gauss–Legendre rules and the composite rules built from them.
//!
//! Endpoint singularities are never handed to a plain rule: callers either
//! remove them with a power substitution or grade the interval geometrically
//! toward the singular end and substitute on the innermost piece.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes an `order`-point rule by Newton iteration on the Legendre
    /// three-term recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let nf = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(order, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = order as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Behaviour of an integrand at one end of an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Smooth,
    /// Integrand behaves like `|x - end|^exponent` times a smooth factor.
    Power(f64),
}

/// Parameters of the geometric grading used near singular endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grading {
    pub ratio: f64,
    pub pieces: usize,
}

impl Default for Grading {
    fn default() -> Self {
        Self { ratio: 0.2, pieces: 12 }
    }
}

/// A composite rule on `[a, b]` as explicit `(node, weight)` pairs, with the
/// substitution Jacobians folded into the weights.
pub fn composite_rule(
    base: &GaussLegendre,
    a: f64,
    b: f64,
    left: Endpoint,
    right: Endpoint,
    grading: Grading,
) -> Vec<(f64, f64)> {
    match (left, right) {
        (Endpoint::Smooth, Endpoint::Smooth) => base.mapped(a, b).collect(),
        (Endpoint::Power(_), Endpoint::Power(_)) => {
            let mid = 0.5 * (a + b);
            let mut rule = composite_rule(base, a, mid, left, Endpoint::Smooth, grading);
            rule.extend(composite_rule(base, mid, b, Endpoint::Smooth, right, grading));
            rule
        }
        (Endpoint::Power(e), Endpoint::Smooth) => graded_toward(base, a, b, e, grading),
        (Endpoint::Smooth, Endpoint::Power(e)) => graded_toward(base, b, a, e, grading),
    }
}

/// Geometric pieces accumulating toward `sing`; the innermost piece uses the
/// substitution `x = sing ± L·y^p` with `p = 1/(1 + exponent)`, which turns
/// `|x - sing|^exponent dx` into a bounded density in `y`.
fn graded_toward(base: &GaussLegendre, sing: f64, other: f64, exponent: f64, grading: Grading) -> Vec<(f64, f64)> {
    let length = (other - sing).abs();
    let dir = (other - sing).signum();
    let mut rule = Vec::with_capacity(base.order() * (grading.pieces + 1));
    let mut outer = 1.0;
    for _ in 0..grading.pieces {
        let inner = outer * grading.ratio;
        let (lo, hi) = (sing + dir * length * inner, sing + dir * length * outer);
        let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
        rule.extend(base.mapped(lo, hi));
        outer = inner;
    }
    let inner_len = length * outer;
    let p = 1.0 / (1.0 + exponent);
    for (y, w) in base.mapped(0.0, 1.0) {
        let x = sing + dir * inner_len * y.powf(p);
        let jac = inner_len * p * y.powf(p - 1.0);
        rule.push((x, w * jac));
    }
    rule
}
