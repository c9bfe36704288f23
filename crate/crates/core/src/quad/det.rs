//! Deterministic graded quadrature for n ≤ 2.
//!
//! With z = y − x = rθ and t = ln r,
//! E = ∫_S dθ ∫ e^{−sp·t} X(e^t, θ) dt,  X(r, θ) = ∫ N(x, x + rθ) dx.
//! X is even in θ, so only half of the directions are visited. Below r_min
//! X ≈ X(r_min)(r/r_min)^p; beyond 2ρ the supports separate and
//! X = 2‖u‖_p^p exactly, so that piece is integrated in closed form.

use rayon::prelude::*;

use super::bounds::{auto_ln_r_max, tail_bound_ln, LN_R_MAX_CAP};
use super::{check_inputs, ray, EngineSpec};
use crate::error::{FracError, Result};
use crate::gauss::{composite, uniform_breaks, GaussLegendre};
use crate::kernel::numerator;
use crate::model::{Budget, EnergyEstimate, FieldKind, Method, Params, PotentialKind, ScalarField, VectorPotential};
use crate::special::sphere_area;

const MAX_DIM: usize = 2;

/// Deterministic estimate of E_{s,p,A}(u) for n ≤ 2.
pub fn energy_det(
    field: &ScalarField,
    potential: &VectorPotential,
    params: &Params,
    engine: &EngineSpec,
) -> Result<EnergyEstimate> {
    let mut engine = engine.clone();
    engine.method = Method::Det;
    check_inputs(field, potential, params, &engine, "det", MAX_DIM)?;
    if field.is_zero() {
        let mut e = EnergyEstimate::zero(Method::Det, None);
        e.r_min = engine.r_min;
        return Ok(e);
    }
    if let FieldKind::Indicator(region) = field.kind() {
        let parts = ray::ray_det(region, potential, params.p, params.sp(), params.norm_flavor, &engine)?;
        let mut e = EnergyEstimate::zero(Method::Det, None);
        e.value = 2.0 * parts.cross + parts.interaction;
        e.budget = Budget { samples: 0, evaluations: parts.evaluations };
        e.refinement = parts.refinement.iter().map(|[c, i]| 2.0 * c + i).collect();
        e.r_max = f64::INFINITY;
        return Ok(e);
    }
    SmoothDet::new(field, potential, params, &engine)?.run()
}

struct SmoothDet<'a> {
    field: &'a ScalarField,
    potential: &'a VectorPotential,
    params: Params,
    engine: &'a EngineSpec,
    rho: f64,
    center: Vec<f64>,
    ln_r_min: f64,
    ln_r_max: f64,
    ln_sep: f64,
    far: f64,
    trunc: f64,
    isotropic: bool,
    rule: GaussLegendre,
}

impl<'a> SmoothDet<'a> {
    fn new(
        field: &'a ScalarField,
        potential: &'a VectorPotential,
        params: &Params,
        engine: &'a EngineSpec,
    ) -> Result<Self> {
        let sp = params.sp();
        let rho = field.integration_radius(params.p);
        let ln_r_min = engine.r_min.ln();
        let ln_r_max = match engine.r_max {
            Some(r) => r.ln().min(LN_R_MAX_CAP),
            None => auto_ln_r_max(field, params),
        };
        let ln_sep = (2.0 * rho).ln().min(ln_r_max);
        if ln_sep <= ln_r_min {
            return Err(FracError::params("r_min must be below the support diameter"));
        }
        let norm = field.lp_norm_p(params.p)?;
        let far = if ln_r_max > ln_sep {
            sphere_area(params.n) * 2.0 * norm.value * ((-sp * ln_sep).exp() - (-sp * ln_r_max).exp()) / sp
        } else {
            0.0
        };
        let isotropic = params.n == 1
            || (field.is_radial()
                && matches!(potential.kind(), PotentialKind::Zero | PotentialKind::Rotational { .. }));
        Ok(SmoothDet {
            field,
            potential,
            params: *params,
            engine,
            rho,
            center: field.center(),
            ln_r_min,
            ln_r_max,
            ln_sep,
            far,
            trunc: tail_bound_ln(norm.value + norm.error, params, ln_r_max),
            isotropic,
            rule: GaussLegendre::new(8),
        })
    }

    fn run(&self) -> Result<EnergyEstimate> {
        let mut refinement = Vec::new();
        let mut evaluations = 0u64;
        let mut last_change = f64::INFINITY;
        for level in 1..=self.engine.det_levels {
            let (value, near, evals) = self.level(level);
            evaluations += evals;
            if let Some(prev) = refinement.last().copied() {
                let prev: f64 = prev;
                last_change = (value - prev).abs() / value.abs().max(f64::MIN_POSITIVE);
                refinement.push(value);
                if last_change <= self.engine.tolerance || value == 0.0 {
                    return Ok(EnergyEstimate {
                        value,
                        stat_error: 0.0,
                        trunc_error: self.trunc,
                        method: Method::Det,
                        budget: Budget { samples: 0, evaluations },
                        seed: None,
                        near_correction: near,
                        r_min: self.engine.r_min,
                        r_max: self.ln_r_max.exp(),
                        refinement,
                    });
                }
            } else {
                refinement.push(value);
            }
        }
        Err(FracError::NonConvergent {
            level: self.engine.det_levels,
            change: last_change,
            tolerance: self.engine.tolerance,
        })
    }

    /// Directions in [0, π) with weights summing to |S^{n−1}|.
    fn directions(&self, m: usize) -> Vec<([f64; 2], f64)> {
        if self.params.n == 1 {
            return vec![([1.0, 0.0], 2.0)];
        }
        if self.isotropic {
            return vec![([1.0, 0.0], 2.0 * std::f64::consts::PI)];
        }
        let count = 2 * m + 2;
        let w = 2.0 * std::f64::consts::PI / count as f64;
        (0..count)
            .map(|j| {
                let a = std::f64::consts::PI * j as f64 / count as f64;
                ([a.cos(), a.sin()], w)
            })
            .collect()
    }

    /// (value, near correction, evaluations) at refinement level `level`.
    fn level(&self, level: usize) -> (f64, f64, u64) {
        let m = level + 1;
        let sp = self.params.sp();
        let width = self.ln_sep - self.ln_r_min;
        let panels = ((width * m as f64) / 3.0).ceil() as usize;
        let t_nodes = composite(&self.rule, &uniform_breaks(self.ln_r_min, self.ln_sep, panels.max(1)));
        let b_nodes = if self.params.n == 2 {
            composite(&self.rule, &uniform_breaks(-self.rho, self.rho, 2 * m))
        } else {
            vec![(0.0, 1.0)]
        };
        let mut value = 0.0;
        let mut near = 0.0;
        let mut evals = 0u64;
        let r_min = self.ln_r_min.exp();
        for (theta, wt) in self.directions(m) {
            let body: Vec<(f64, u64)> = t_nodes
                .par_iter()
                .map(|(t, w)| {
                    let (x, e) = self.cross_section(t.exp(), theta, m, &b_nodes);
                    (w * (-sp * t).exp() * x, e)
                })
                .collect();
            let (x_min, e_min) = self.cross_section(r_min, theta, m, &b_nodes);
            let tail_near = x_min * (-sp * self.ln_r_min).exp() / (self.params.p - sp);
            value += wt * (body.iter().map(|b| b.0).sum::<f64>() + tail_near);
            near += wt * tail_near;
            evals += body.iter().map(|b| b.1).sum::<u64>() + e_min;
        }
        (value + self.far, near, evals)
    }

    /// X(r, θ) over the midpoint frame m = c + aθ + bθ⊥, x = m − (r/2)θ.
    fn cross_section(&self, r: f64, theta: [f64; 2], m: usize, b_nodes: &[(f64, f64)]) -> (f64, u64) {
        let half = 0.5 * r;
        let extent = half + self.rho;
        let per_side = ((extent / self.rho) * m as f64).ceil() as usize;
        let mut breaks = uniform_breaks(-extent, 0.0, per_side);
        breaks.extend(uniform_breaks(0.0, extent, per_side).into_iter().skip(1));
        let a_nodes = composite(&self.rule, &breaks);
        let n = self.params.n;
        let perp = [-theta[1], theta[0]];
        let mut x = [0.0; 2];
        let mut y = [0.0; 2];
        let mut sum = 0.0;
        for (b, wb) in b_nodes {
            for (a, wa) in &a_nodes {
                for k in 0..n {
                    let base = self.center[k] + b * perp[k];
                    x[k] = base + (a - half) * theta[k];
                    y[k] = base + (a + half) * theta[k];
                }
                let v = numerator(self.field, self.potential, &self.params, &x[..n], &y[..n]);
                sum += wa * wb * v;
            }
        }
        (sum, (a_nodes.len() * b_nodes.len()) as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_closed_form_1d() {
        // s·E_s = √(2π)·2^{−s}·Γ(1 − s) for e^{−x²}, p = 2, A = 0
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        let a = VectorPotential::zero(1);
        for s in [0.25, 0.5, 0.75] {
            let params = Params::new(1, 2.0, s).unwrap();
            let e = energy_det(&g, &a, &params, &EngineSpec::det()).unwrap();
            let exact = (2.0 * std::f64::consts::PI).sqrt() * 2f64.powf(-s) * crate::special::gamma(1.0 - s) / s;
            assert_relative_eq!(e.value, exact, max_relative = 2e-3);
            assert!(e.refinement.len() >= 2);
        }
    }

    #[test]
    fn rejects_three_dimensions() {
        let g = ScalarField::gaussian(3, 1.0).unwrap();
        let a = VectorPotential::zero(3);
        let params = Params::new(3, 2.0, 0.5).unwrap();
        assert!(matches!(energy_det(&g, &a, &params, &EngineSpec::det()), Err(FracError::UnsupportedDimension { .. })));
    }

    #[test]
    fn non_convergence_is_reported() {
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        let a = VectorPotential::zero(1);
        let params = Params::new(1, 2.0, 0.5).unwrap();
        let mut engine = EngineSpec::det().with_tolerance(1e-300);
        engine.det_levels = 2;
        assert!(matches!(energy_det(&g, &a, &params, &engine), Err(FracError::NonConvergent { .. })));
    }
}
