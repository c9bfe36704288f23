use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, FracError, Result};

pub type PotentialFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
pub type BoundFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct CustomPotential {
    pub label: String,
    pub eval: Arc<PotentialFn>,
    /// radius ↦ sup_{|x| ≤ radius} |A(x)|
    pub bound: Arc<BoundFn>,
}

impl fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPotential").field("label", &self.label).finish()
    }
}

#[derive(Debug, Clone)]
pub enum PotentialKind {
    Zero,
    Constant(Vec<f64>),
    /// A(x) = (b/2)(-x₂, x₁, 0, …)
    Rotational {
        strength: f64,
    },
    /// A_k(x) = amplitude · sin(frequency · x_{k+1 mod n})
    Oscillatory {
        amplitude: f64,
        frequency: f64,
    },
    Custom(CustomPotential),
}

/// Vector potential A: R^n → R^n.
#[derive(Debug, Clone)]
pub struct VectorPotential {
    kind: PotentialKind,
    dim: usize,
}

impl VectorPotential {
    pub fn zero(dim: usize) -> Self {
        VectorPotential { kind: PotentialKind::Zero, dim }
    }

    pub fn constant(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.iter().any(|v| !v.is_finite()) {
            return Err(FracError::params("constant potential must be a finite vector"));
        }
        let dim = a.len();
        Ok(VectorPotential { kind: PotentialKind::Constant(a), dim })
    }

    pub fn rotational(dim: usize, strength: f64) -> Result<Self> {
        if dim < 2 {
            return Err(FracError::params("rotational potential needs n >= 2"));
        }
        if !strength.is_finite() {
            return Err(FracError::params("rotational strength must be finite"));
        }
        Ok(VectorPotential { kind: PotentialKind::Rotational { strength }, dim })
    }

    pub fn oscillatory(dim: usize, amplitude: f64, frequency: f64) -> Result<Self> {
        if !(amplitude.is_finite() && frequency.is_finite()) {
            return Err(FracError::params("oscillatory parameters must be finite"));
        }
        Ok(VectorPotential { kind: PotentialKind::Oscillatory { amplitude, frequency }, dim })
    }

    pub fn custom(dim: usize, label: impl Into<String>, eval: Arc<PotentialFn>, bound: Arc<BoundFn>) -> Self {
        VectorPotential { kind: PotentialKind::Custom(CustomPotential { label: label.into(), eval, bound }), dim }
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            PotentialKind::Zero => "zero",
            PotentialKind::Constant(_) => "constant",
            PotentialKind::Rotational { .. } => "rotational",
            PotentialKind::Oscillatory { .. } => "oscillatory",
            PotentialKind::Custom(_) => "custom",
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            PotentialKind::Zero => true,
            PotentialKind::Constant(a) => a.iter().all(|v| *v == 0.0),
            PotentialKind::Rotational { strength } => *strength == 0.0,
            PotentialKind::Oscillatory { amplitude, .. } => *amplitude == 0.0,
            PotentialKind::Custom(_) => false,
        }
    }

    /// Whether |A| grows without bound.
    pub fn is_unbounded(&self) -> bool {
        matches!(self.kind, PotentialKind::Rotational { strength } if strength != 0.0)
            || matches!(self.kind, PotentialKind::Custom(_))
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            PotentialKind::Zero => out.iter_mut().for_each(|v| *v = 0.0),
            PotentialKind::Constant(a) => out.copy_from_slice(a),
            PotentialKind::Rotational { strength } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[0] = -0.5 * strength * x[1];
                out[1] = 0.5 * strength * x[0];
            }
            PotentialKind::Oscillatory { amplitude, frequency } => {
                let n = x.len();
                for k in 0..n {
                    out[k] = amplitude * (frequency * x[(k + 1) % n]).sin();
                }
            }
            PotentialKind::Custom(c) => (c.eval)(x, out),
        }
    }

    /// sup_{|x| ≤ radius} |A(x)|.
    pub fn local_bound(&self, radius: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant(a) => a.iter().map(|v| v * v).sum::<f64>().sqrt(),
            PotentialKind::Rotational { strength } => 0.5 * strength.abs() * radius,
            PotentialKind::Oscillatory { amplitude, .. } => amplitude.abs() * (self.dim as f64).sqrt(),
            PotentialKind::Custom(c) => (c.bound)(radius),
        }
    }

    /// Midpoint phase (x − y)·A((x + y)/2), unchecked.
    #[inline]
    pub fn phase(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant(a) => x.iter().zip(y).zip(a).map(|((p, q), c)| (p - q) * c).sum(),
            PotentialKind::Rotational { strength } => {
                // the midpoint terms cancel: (b/2)(x₂y₁ − x₁y₂)
                0.5 * strength * (x[1] * y[0] - x[0] * y[1])
            }
            PotentialKind::Oscillatory { amplitude, frequency } => {
                let n = x.len();
                (0..n)
                    .map(|k| {
                        let j = (k + 1) % n;
                        (x[k] - y[k]) * amplitude * (frequency * 0.5 * (x[j] + y[j])).sin()
                    })
                    .sum()
            }
            PotentialKind::Custom(c) => {
                let mid: Vec<f64> = x.iter().zip(y).map(|(p, q)| 0.5 * (p + q)).collect();
                let mut a = vec![0.0; x.len()];
                (c.eval)(&mid, &mut a);
                x.iter().zip(y).zip(&a).map(|((p, q), c)| (p - q) * c).sum()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn evaluation_examples() {
        assert_eq!(VectorPotential::zero(3).eval(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 3]);
        let c = VectorPotential::constant(vec![1.0, 2.0]).unwrap();
        assert_eq!(c.eval(&[5.0, 5.0]).unwrap(), vec![1.0, 2.0]);
        let r = VectorPotential::rotational(2, 2.0).unwrap();
        assert_eq!(r.eval(&[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        assert!(VectorPotential::rotational(1, 1.0).is_err());
        assert!(c.eval(&[1.0]).is_err());
    }

    #[test]
    fn rotational_phase_matches_midpoint_definition() {
        let r = VectorPotential::rotational(2, 2.0).unwrap();
        // midpoint (0.5, 0.5), A = (−0.5, 0.5), x − y = (1, −1)
        assert_eq!(r.phase(&[1.0, 0.0], &[0.0, 1.0]), -1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let r3 = VectorPotential::rotational(3, 1.3).unwrap();
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            let a = r3.eval(&mid).unwrap();
            let direct: f64 = (0..3).map(|k| (x[k] - y[k]) * a[k]).sum();
            assert!((direct - r3.phase(&x, &y)).abs() < 1e-12);
        }
    }

    #[test]
    fn local_bound_dominates_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let pots = vec![
            VectorPotential::zero(2),
            VectorPotential::constant(vec![1.0, -2.0]).unwrap(),
            VectorPotential::rotational(2, 2.0).unwrap(),
            VectorPotential::oscillatory(2, 1.0, 3.0).unwrap(),
        ];
        for pot in &pots {
            for radius in [0.5, 1.0, 4.0] {
                let bound = pot.local_bound(radius);
                for _ in 0..100_000 {
                    // uniform in the disc
                    let r = radius * rng.random::<f64>().sqrt();
                    let t = rng.random_range(0.0..std::f64::consts::TAU);
                    let a = pot.eval(&[r * t.cos(), r * t.sin()]).unwrap();
                    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                    assert!(norm <= bound * (1.0 + 1e-12), "{} r={radius}", pot.label());
                }
            }
        }
    }
}
