//! Domain types and the closed-form catalog of fields, potentials and regions.

mod estimate;
mod field;
mod potential;
mod region;

pub use estimate::{Budget, EnergyEstimate, LimitFit, LimitModel, Method};
pub use field::{CustomField, FieldFn, FieldKind, LpNorm, ScalarField};
pub use potential::{BoundFn, CustomPotential, PotentialFn, PotentialKind, VectorPotential};
pub use region::SetRegion;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, FracError, Result};

/// Modulus used for complex numbers and complex vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormFlavor {
    /// |z|₂
    #[default]
    Euclid,
    /// (|Re z|^p + |Im z|^p)^{1/p}
    SplitP,
}

impl std::str::FromStr for NormFlavor {
    type Err = FracError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclid" => Ok(NormFlavor::Euclid),
            "split_p" | "split-p" => Ok(NormFlavor::SplitP),
            other => Err(FracError::Config(format!("unknown norm flavor `{other}`"))),
        }
    }
}

impl NormFlavor {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormFlavor::Euclid => "euclid",
            NormFlavor::SplitP => "split_p",
        }
    }
}

/// The triple (n, p, s) plus the complex-norm flavor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub p: f64,
    pub s: f64,
    #[serde(default)]
    pub norm_flavor: NormFlavor,
}

impl Params {
    pub fn new(n: usize, p: f64, s: f64) -> Result<Self> {
        let params = Params { n, p, s, norm_flavor: NormFlavor::Euclid };
        params.validate()?;
        Ok(params)
    }

    pub fn with_flavor(mut self, flavor: NormFlavor) -> Self {
        self.norm_flavor = flavor;
        self
    }

    pub fn with_s(mut self, s: f64) -> Result<Self> {
        self.s = s;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        validate_np(self.n, self.p)?;
        validate_s(self.s)
    }

    /// s·p, the exponent excess over n in the kernel.
    pub fn sp(&self) -> f64 {
        self.s * self.p
    }

    /// Hardy/Sobolev side condition n > s·p.
    pub fn require_hardy(&self) -> Result<()> {
        if (self.n as f64) > self.sp() {
            Ok(())
        } else {
            Err(FracError::params(format!(
                "Hardy and Sobolev quantities require n > s·p (n = {}, s·p = {})",
                self.n,
                self.sp()
            )))
        }
    }

    pub(crate) fn check_field(&self, field: &ScalarField, potential: &VectorPotential) -> Result<()> {
        check_dim(self.n, field.dimension())?;
        check_dim(self.n, potential.dimension())
    }
}

pub fn validate_np(n: usize, p: f64) -> Result<()> {
    if n < 1 {
        return Err(FracError::params("n must be >= 1"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(FracError::params(format!("p must lie in [1, inf), got {p}")));
    }
    Ok(())
}

pub fn validate_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(FracError::params(format!("s must lie in (0, 1), got {s}")))
    }
}

/// ∇u(x) − iA(x)u(x), componentwise.
pub fn magnetic_gradient(field: &ScalarField, potential: &VectorPotential, x: &[f64]) -> Result<Vec<Complex64>> {
    check_dim(field.dimension(), x.len())?;
    check_dim(potential.dimension(), x.len())?;
    let mut g = field.gradient(x)?;
    let a = potential.eval(x)?;
    let u = field.value(x);
    for (gk, ak) in g.iter_mut().zip(&a) {
        *gk -= Complex64::new(0.0, *ak) * u;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn params_validation() {
        assert!(Params::new(1, 2.0, 0.5).is_ok());
        assert!(Params::new(0, 2.0, 0.5).is_err());
        assert!(Params::new(1, 0.5, 0.5).is_err());
        assert!(Params::new(1, 2.0, 1.0).is_err());
        assert!(Params::new(1, 2.0, 0.0).is_err());
        assert!(Params::new(1, f64::INFINITY, 0.5).is_err());
        assert!(Params::new(1, 2.0, 0.6).unwrap().require_hardy().is_err());
        assert!(Params::new(2, 2.0, 0.6).unwrap().require_hardy().is_ok());
    }

    #[test]
    fn magnetic_gradient_examples() {
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        let zero = VectorPotential::zero(1);
        let one = VectorPotential::constant(vec![1.0]).unwrap();
        assert_eq!(magnetic_gradient(&g, &zero, &[0.0]).unwrap()[0].norm(), 0.0);
        let v = magnetic_gradient(&g, &one, &[0.0]).unwrap()[0];
        assert_relative_eq!(v.re, 0.0);
        assert_relative_eq!(v.im, -1.0);
        let d = magnetic_gradient(&g, &zero, &[1.0]).unwrap()[0];
        assert_relative_eq!(d.re, -2.0 * (-1.0f64).exp(), max_relative = 1e-15);
        let ind = ScalarField::indicator(SetRegion::unit_ball(1));
        assert!(matches!(magnetic_gradient(&ind, &zero, &[0.0]), Err(FracError::GradientUnavailable(_))));
    }
}
