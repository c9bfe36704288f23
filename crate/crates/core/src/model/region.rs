use serde::{Deserialize, Serialize};

use crate::error::{check_dim, FracError, Result};
use crate::special::{sphere_area, unit_ball_volume};

/// Bounded set E ⊂ R^n with closed-form membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SetRegion {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl SetRegion {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(FracError::params("ball center must have dimension >= 1"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(FracError::params(format!("ball radius must be positive, got {radius}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(FracError::params("ball center must be finite"));
        }
        Ok(SetRegion::Ball { center, radius })
    }

    pub fn unit_ball(n: usize) -> Self {
        SetRegion::Ball { center: vec![0.0; n], radius: 1.0 }
    }

    pub fn cube(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(FracError::params("box must have dimension >= 1"));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && u > l) {
                return Err(FracError::params(format!("box corners must satisfy lower < upper, got [{l}, {u}]")));
            }
        }
        Ok(SetRegion::Box { lower, upper })
    }

    pub fn dimension(&self) -> usize {
        match self {
            SetRegion::Ball { center, .. } => center.len(),
            SetRegion::Box { lower, .. } => lower.len(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            SetRegion::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                d2 <= radius * radius
            }
            SetRegion::Box { lower, upper } => {
                x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| *v >= *l && *v <= *u)
            }
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            SetRegion::Ball { center, radius } => unit_ball_volume(center.len()) * radius.powi(center.len() as i32),
            SetRegion::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| u - l).product(),
        }
    }

    /// H^{n-1}(∂E); for n = 1 the number of boundary points.
    pub fn boundary_measure(&self) -> f64 {
        match self {
            SetRegion::Ball { center, radius } => {
                let n = center.len();
                sphere_area(n) * radius.powi(n as i32 - 1)
            }
            SetRegion::Box { lower, upper } => {
                let sides: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
                let n = sides.len();
                (0..n)
                    .map(|k| 2.0 * sides.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, s)| s).product::<f64>())
                    .sum()
            }
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            SetRegion::Ball { center, .. } => center.clone(),
            SetRegion::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect(),
        }
    }

    /// Radius of the smallest ball about `center()` containing the region.
    pub fn circumradius(&self) -> f64 {
        match self {
            SetRegion::Ball { radius, .. } => *radius,
            SetRegion::Box { lower, upper } => {
                lower.iter().zip(upper).map(|(l, u)| 0.25 * (u - l) * (u - l)).sum::<f64>().sqrt()
            }
        }
    }

    /// Parameter interval {t ≥ 0 : x + tθ ∈ E} for unit θ (convex E, so one
    /// interval or none).
    pub fn ray_interval(&self, x: &[f64], theta: &[f64]) -> Option<(f64, f64)> {
        match self {
            SetRegion::Ball { center, radius } => {
                let mut b = 0.0;
                let mut c = -radius * radius;
                for k in 0..x.len() {
                    let d = x[k] - center[k];
                    b += d * theta[k];
                    c += d * d;
                }
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                // stable roots of t^2 + 2bt + c = 0
                let (t0, t1) = if b > 0.0 {
                    let q = -b - sq;
                    (q, if q != 0.0 { c / q } else { 0.0 })
                } else {
                    let q = -b + sq;
                    (if q != 0.0 { c / q } else { 0.0 }, q)
                };
                let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
                if hi < 0.0 {
                    None
                } else {
                    Some((lo.max(0.0), hi))
                }
            }
            SetRegion::Box { lower, upper } => {
                let mut lo = 0.0_f64;
                let mut hi = f64::INFINITY;
                for k in 0..x.len() {
                    if theta[k] == 0.0 {
                        if x[k] < lower[k] || x[k] > upper[k] {
                            return None;
                        }
                        continue;
                    }
                    let a = (lower[k] - x[k]) / theta[k];
                    let b = (upper[k] - x[k]) / theta[k];
                    let (a, b) = if a <= b { (a, b) } else { (b, a) };
                    lo = lo.max(a);
                    hi = hi.min(b);
                }
                if lo <= hi {
                    Some((lo, hi))
                } else {
                    None
                }
            }
        }
    }

    /// Distance from an interior point to ∂E along θ.
    pub fn exit_distance(&self, x: &[f64], theta: &[f64]) -> f64 {
        self.ray_interval(x, theta).map(|(_, t)| t).unwrap_or(0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            SetRegion::Ball { center, radius } => {
                SetRegion::Ball { center: center.iter().map(|c| c * factor).collect(), radius: radius * factor }
            }
            SetRegion::Box { lower, upper } => SetRegion::Box {
                lower: lower.iter().map(|c| c * factor).collect(),
                upper: upper.iter().map(|c| c * factor).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn measures() {
        assert_relative_eq!(SetRegion::unit_ball(2).measure(), PI, max_relative = 1e-14);
        assert_relative_eq!(SetRegion::unit_ball(2).boundary_measure(), 2.0 * PI, max_relative = 1e-14);
        let b = SetRegion::cube(vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert_relative_eq!(b.measure(), 6.0);
        assert_relative_eq!(b.boundary_measure(), 22.0);
        let i = SetRegion::cube(vec![-0.5], vec![0.5]).unwrap();
        assert_relative_eq!(i.boundary_measure(), 2.0);
    }

    #[test]
    fn membership_is_exact() {
        let b = SetRegion::unit_ball(2);
        assert!(b.contains(&[1.0, 0.0]));
        assert!(!b.contains(&[2.0, 0.0]));
        assert!(SetRegion::ball(vec![0.0], -1.0).is_err());
        assert!(SetRegion::cube(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn ray_intervals() {
        let b = SetRegion::unit_ball(2);
        let (a, e) = b.ray_interval(&[0.5, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(a, 0.0);
        assert_relative_eq!(e, 0.5, max_relative = 1e-15);
        let (a, e) = b.ray_interval(&[-3.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_relative_eq!(a, 2.0, max_relative = 1e-15);
        assert_relative_eq!(e, 4.0, max_relative = 1e-15);
        assert!(b.ray_interval(&[3.0, 0.0], &[1.0, 0.0]).is_none());

        let bx = SetRegion::cube(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let s = 0.5_f64.sqrt();
        let e = bx.exit_distance(&[0.0, 0.0], &[s, s]);
        assert_relative_eq!(e, 2.0_f64.sqrt(), max_relative = 1e-14);
    }
}
