//! Gauss–Legendre rules and composite panel helpers.

use std::f64::consts::PI;

/// Nodes and weights of an m-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_m from the Chebyshev-like initial guesses.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes/weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// (P_m(x), P_m'(x)) by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Split [a, b] into `count` equal panels.
pub fn uniform_breaks(a: f64, b: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    (0..=count).map(|i| a + (b - a) * i as f64 / count as f64).collect()
}

/// Breakpoints on [a, b] refined geometrically toward `a` (ratio `q`,
/// `levels` layers) and then uniformly over the remainder.
pub fn graded_breaks_left(a: f64, b: f64, q: f64, levels: usize, uniform: usize) -> Vec<f64> {
    let len = b - a;
    let mut pts = vec![a];
    for k in (1..=levels).rev() {
        pts.push(a + len * q.powi(k as i32));
    }
    let start = *pts.last().unwrap();
    for x in uniform_breaks(start, b, uniform).into_iter().skip(1) {
        pts.push(x);
    }
    pts
}

/// Breakpoints graded toward both endpoints of [a, b].
pub fn graded_breaks_both(a: f64, b: f64, q: f64, levels: usize, uniform: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = uniform.div_ceil(2).max(1);
    let mut left = graded_breaks_left(a, mid, q, levels, half);
    let right = graded_breaks_left(b, mid, q, levels, half);
    left.extend(right.into_iter().rev().skip(1));
    left
}

/// Composite rule over consecutive breakpoints.
pub fn composite(rule: &GaussLegendre, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(rule.len() * breaks.len());
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            out.extend(rule.mapped(w[0], w[1]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for m in 1..40 {
            let g = GaussLegendre::new(m);
            let s: f64 = g.weights.iter().sum();
            assert_relative_eq!(s, 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let g = GaussLegendre::new(6);
        // degree 11 is the limit for 6 nodes
        let v = g.integrate(0.0, 2.0, |x| x.powi(11));
        assert_relative_eq!(v, 2f64.powi(12) / 12.0, max_relative = 1e-13);
    }

    #[test]
    fn graded_breaks_are_monotone() {
        let b = graded_breaks_both(-1.0, 3.0, 0.2, 6, 5);
        assert_eq!(b[0], -1.0);
        assert_eq!(*b.last().unwrap(), 3.0);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn graded_rule_handles_endpoint_singularity() {
        let g = GaussLegendre::new(10);
        let nodes = composite(&g, &graded_breaks_left(0.0, 1.0, 0.3, 50, 2));
        let v: f64 = nodes.iter().map(|(x, w)| w * x.powf(-0.5)).sum();
        assert_relative_eq!(v, 2.0, max_relative = 1e-10);
    }
}
