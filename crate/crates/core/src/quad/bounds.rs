//! Rigorous truncation bounds for the two ends of the radial variable.

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::model::{FieldKind, Params, ScalarField, VectorPotential};
use crate::special::{sphere_area, unit_ball_volume};

/// Largest ln r_max the engines will use; keeps r_max finite in f64.
pub(crate) const LN_R_MAX_CAP: f64 = 700.0;

/// Upper bound on ∫∫_{|x−y| ≥ R} |u(x) − e^{iφ}u(y)|^p / |x−y|^{n+ps}, from
/// |a − b|^p ≤ 2^{p−1}(|a|^p + |b|^p): 2^p ‖u‖_p^p |S^{n−1}| / (sp R^{sp}).
pub fn tail_bound(field: &ScalarField, params: &Params, r: f64) -> Result<f64> {
    params.validate()?;
    if !(r > 0.0) {
        return Err(FracError::params(format!("truncation radius must be positive, got {r}")));
    }
    let norm = field.lp_norm_p(params.p).map_err(|_| FracError::UnknownNorm(field.label().to_string()))?;
    Ok(tail_bound_ln(norm.value + norm.error, params, r.ln()))
}

pub(crate) fn tail_bound_ln(norm_p: f64, params: &Params, ln_r: f64) -> f64 {
    let sp = params.sp();
    2f64.powf(params.p) * norm_p * sphere_area(params.n) / sp * (-sp * ln_r).exp()
}

/// ln r_max such that the tail bound is about 10⁻³ of the separated-support
/// far-field mass 2‖u‖_p^p|S|(2ρ)^{−sp}/(sp).
pub(crate) fn auto_ln_r_max(field: &ScalarField, params: &Params) -> f64 {
    let rho = field.integration_radius(params.p);
    let base = (2.0 * rho).max(1.0).ln();
    let extra = (2f64.powf(params.p - 1.0) * 1000.0).ln() / params.sp();
    (base + extra).clamp(2f64.ln(), LN_R_MAX_CAP)
}

/// Result of [`inner_cutoff_error`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffBound {
    /// Upper bound on the mass of {|x − y| < r_min}.
    Bound(f64),
    /// The field is not Lipschitz; engines integrate the near field exactly.
    ExactIndicator,
}

impl CutoffBound {
    /// The numeric bound, zero for the exact indicator path.
    pub fn value(&self) -> f64 {
        match self {
            CutoffBound::Bound(v) => *v,
            CutoffBound::ExactIndicator => 0.0,
        }
    }
}

/// Bound on the omitted near-diagonal mass:
/// |B|·|S|·(L + M·U)^p · r_min^{p−ps}/(p − ps), where B is the ball about the
/// support that can hold a nonzero pair, L the Lipschitz constant of u, U its
/// sup and M the bound of A on the midpoints.
pub fn inner_cutoff_error(
    field: &ScalarField,
    potential: &VectorPotential,
    params: &Params,
    r_min: f64,
) -> Result<CutoffBound> {
    params.validate()?;
    if !(r_min > 0.0) {
        return Err(FracError::params(format!("r_min must be positive, got {r_min}")));
    }
    if matches!(field.kind(), FieldKind::Indicator(_)) {
        return Ok(CutoffBound::ExactIndicator);
    }
    if field.is_zero() {
        return Ok(CutoffBound::Bound(0.0));
    }
    let lip = field
        .lipschitz()
        .ok_or_else(|| FracError::params(format!("field `{}` has no Lipschitz constant", field.label())))?;
    let n = params.n;
    let (p, sp) = (params.p, params.sp());
    let radius = field.integration_radius(p) + r_min;
    let center_norm = field.center().iter().map(|v| v * v).sum::<f64>().sqrt();
    let m = potential.local_bound(center_norm + radius);
    let volume = unit_ball_volume(n) * radius.powi(n as i32);
    let constant = volume * sphere_area(n) * (lip + m * field.sup_modulus()).powf(p) / (p - sp);
    Ok(CutoffBound::Bound(constant * r_min.powf(p - sp)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tail_bound_examples() {
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        let params = Params::new(1, 2.0, 0.5).unwrap();
        let b = tail_bound(&g, &params, 10.0).unwrap();
        assert_relative_eq!(b, 4.0 * (std::f64::consts::PI / 2.0).sqrt() * 2.0 / 10.0, max_relative = 1e-14);
        assert_relative_eq!(b, 1.00265, max_relative = 1e-5);
        let b2 = tail_bound(&g, &params, 20.0).unwrap();
        assert_relative_eq!(b2, 0.5 * b, max_relative = 1e-14);
        assert!(tail_bound(&g, &params, 1e300).unwrap() < 1e-290);
    }

    #[test]
    fn cutoff_scaling() {
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        let a = VectorPotential::zero(1);
        let params = Params::new(1, 2.0, 0.5).unwrap();
        let b1 = inner_cutoff_error(&g, &a, &params, 1e-3).unwrap().value();
        let b2 = inner_cutoff_error(&g, &a, &params, 5e-4).unwrap().value();
        // the support radius grows by r_min, so the ratio is exact only to O(r_min)
        assert_relative_eq!(b2 / b1, 2f64.powf(-params.p * (1.0 - params.s)), max_relative = 1e-3);
        let ind = ScalarField::indicator(crate::model::SetRegion::unit_ball(1));
        assert_eq!(inner_cutoff_error(&ind, &a, &params, 1e-3).unwrap(), CutoffBound::ExactIndicator);
    }

    #[test]
    fn auto_radius_meets_target() {
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        for s in [0.05, 0.25, 0.5, 0.9] {
            let params = Params::new(1, 2.0, s).unwrap();
            let ln_r = auto_ln_r_max(&g, &params);
            let norm = g.closed_lp_norm(2.0).unwrap();
            let far = 2.0 * norm * 2.0 * (-params.sp() * (2.0 * g.integration_radius(2.0)).ln()).exp() / params.sp();
            assert!(tail_bound_ln(norm, &params, ln_r) <= 1.0001e-3 * far, "s = {s}");
        }
    }
}
