//! Inequality audits and the magnetic s-perimeter.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asym::{extrapolate, Endpoint, Integral, ScanRow};
use crate::error::{check_dim, FracError, Result};
use crate::gauss::{composite, graded_breaks_left, uniform_breaks, GaussLegendre};
use crate::kernel::difference;
use crate::model::{
    validate_np, validate_s, Budget, EnergyEstimate, FieldKind, LimitFit, LimitModel, Method, Params, ScalarField,
    SetRegion, VectorPotential,
};
use crate::quad::mc::run_sharded;
use crate::quad::ray::{ray_det, ray_mc};
use crate::quad::sampler::direction;
use crate::quad::{energy, EngineSpec};
use crate::special::sphere_area;

/// Absolute slack below which RHS − LHS is not counted as a violation.
pub const AUDIT_TOLERANCE: f64 = 1e-12;
const AUDIT_CHUNK: u64 = 1 << 16;
const STREAM_AUDIT: u64 = 5 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub samples: u64,
    /// Pairs with RHS − LHS < −`AUDIT_TOLERANCE`.
    pub violations: u64,
    /// Smallest RHS − LHS seen.
    pub worst_margin: f64,
    pub seed: u64,
}

/// |u(x) − e^{iφ}u(y)| − ||u(x)| − |u(y)||.
pub fn diamagnetic_margin(field: &ScalarField, potential: &VectorPotential, x: &[f64], y: &[f64]) -> f64 {
    let rhs = difference(field, potential, x, y).norm();
    rhs - (field.value(x).norm() - field.value(y).norm()).abs()
}

/// Radius about the field's center that holds the pairs an audit draws.
fn audit_radius(field: &ScalarField) -> f64 {
    match field.kind() {
        // straddle the boundary so both sides of the jump are exercised
        FieldKind::Indicator(region) => 1.5 * region.circumradius(),
        _ => field.mass_radius(2.0, 1.0 - 1e-8),
    }
}

/// Checks the pointwise diamagnetic inequality on `sample_count` pairs drawn
/// uniformly from the field's effective support ball.
pub fn diamagnetic_audit(
    field: &ScalarField,
    potential: &VectorPotential,
    n: usize,
    sample_count: u64,
    seed: u64,
) -> Result<AuditReport> {
    check_dim(n, field.dimension())?;
    check_dim(n, potential.dimension())?;
    if sample_count == 0 {
        return Err(FracError::params("sample_count must be >= 1"));
    }
    let radius = audit_radius(field);
    let center = field.center();
    let chunks = sample_count.div_ceil(AUDIT_CHUNK) as usize;
    let parts = run_sharded(seed, STREAM_AUDIT, chunks, sample_count, |rng, count| {
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut violations = 0u64;
        let mut worst = f64::INFINITY;
        for _ in 0..count {
            ball_point(rng, &center, radius, &mut x);
            ball_point(rng, &center, radius, &mut y);
            let m = diamagnetic_margin(field, potential, &x, &y);
            if m < -AUDIT_TOLERANCE {
                violations += 1;
            }
            worst = worst.min(m);
        }
        (violations, worst)
    });
    Ok(AuditReport {
        samples: sample_count,
        violations: parts.iter().map(|p| p.0).sum(),
        worst_margin: parts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        seed,
    })
}

fn ball_point(rng: &mut ChaCha8Rng, center: &[f64], radius: f64, out: &mut [f64]) {
    let n = out.len();
    direction(rng, n, out);
    let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
    for k in 0..n {
        out[k] = center[k] + r * out[k];
    }
}

/// Direction nodes on S^{n−1} with weights summing to |S^{n−1}|, n ≤ 3.
fn sphere_nodes(n: usize, m: usize) -> Vec<(Vec<f64>, f64)> {
    use std::f64::consts::PI;
    match n {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => (0..m)
            .map(|j| {
                let a = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                (vec![a.cos(), a.sin()], 2.0 * PI / m as f64)
            })
            .collect(),
        _ => {
            let rule = GaussLegendre::new(m.min(64));
            let zs: Vec<(f64, f64)> = composite(&rule, &uniform_breaks(-1.0, 1.0, m.div_ceil(64)));
            let mut out = Vec::with_capacity(zs.len() * 2 * m);
            for (z, wz) in zs {
                let rho = (1.0 - z * z).sqrt();
                for j in 0..2 * m {
                    let a = PI * (j as f64 + 0.5) / m as f64;
                    out.push((vec![rho * a.cos(), rho * a.sin(), z], wz * PI / m as f64));
                }
            }
            out
        }
    }
}

/// ∫|u(x)|^p |x|^{−sp} dx, n ≤ 3, requiring n > sp.
///
/// With t = r^{n−sp}/(n−sp) the radial weight r^{n−1−sp}dr becomes dt and the
/// integrand is bounded at the origin.
pub fn hardy_lhs(field: &ScalarField, s: f64, p: f64, n: usize) -> Result<Integral> {
    check_dim(n, field.dimension())?;
    let params = Params::new(n, p, s)?;
    params.require_hardy()?;
    if n > 3 {
        return Err(FracError::UnsupportedDimension { engine: "hardy quadrature", max: 3, got: n });
    }
    if field.is_zero() {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let coarse = hardy_at(field, &params, 1);
    let fine = hardy_at(field, &params, 2);
    Ok(Integral { value: fine, error: (fine - coarse).abs() + 1e-14 * fine.abs() })
}

fn hardy_at(field: &ScalarField, params: &Params, level: usize) -> f64 {
    let (n, p) = (params.n, params.p);
    let e = n as f64 - params.sp();
    let dirs = sphere_nodes(n, 32 * level);
    if let FieldKind::Indicator(region) = field.kind() {
        // radial antiderivative is exact along each ray from the origin
        let origin = vec![0.0; n];
        return dirs
            .iter()
            .map(|(theta, w)| match region.ray_interval(&origin, theta) {
                Some((t0, t1)) => w * (t1.powf(e) - t0.powf(e)) / e,
                None => 0.0,
            })
            .sum();
    }
    let center = field.center();
    let reach = center.iter().map(|c| c * c).sum::<f64>().sqrt() + field.integration_radius(p);
    let t_max = reach.powf(e) / e;
    let rule = GaussLegendre::new(8);
    let nodes = composite(&rule, &graded_breaks_left(0.0, t_max, 0.25, 24 * level, 24 * level));
    nodes
        .par_iter()
        .map(|(t, wt)| {
            let r = (e * t).powf(1.0 / e);
            let mut x = vec![0.0; n];
            let shell: f64 = dirs
                .iter()
                .map(|(theta, w)| {
                    for k in 0..n {
                        x[k] = r * theta[k];
                    }
                    w * field.value(&x).norm().powf(p)
                })
                .sum();
            wt * shell
        })
        .sum()
}

/// (∫|u|^{np/(n−sp)})^{(n−sp)/n}, requiring n > sp.
pub fn sobolev_lhs(field: &ScalarField, s: f64, p: f64, n: usize) -> Result<Integral> {
    check_dim(n, field.dimension())?;
    let params = Params::new(n, p, s)?;
    params.require_hardy()?;
    let nf = n as f64;
    let q = nf * p / (nf - params.sp());
    let norm = field.lp_norm_p(q)?;
    let k = (nf - params.sp()) / nf;
    let value = norm.value.powf(k);
    // d(v^k) = k v^{k−1} dv
    let error = if norm.value > 0.0 { k * norm.value.powf(k - 1.0) * norm.error } else { 0.0 };
    Ok(Integral { value, error })
}

/// One grid point of a Hardy/Sobolev ratio scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyRow {
    pub s: f64,
    pub hardy: Integral,
    pub sobolev: Integral,
    pub energy: EnergyEstimate,
    pub hardy_ratio: f64,
    pub sobolev_ratio: f64,
}

/// hardy_lhs / E and sobolev_lhs / E along `s_grid`.
pub fn hardy_ratio_scan(
    field: &ScalarField,
    potential: &VectorPotential,
    p: f64,
    n: usize,
    s_grid: &[f64],
    engine: &EngineSpec,
) -> Result<Vec<HardyRow>> {
    validate_np(n, p)?;
    if field.is_zero() {
        return Err(FracError::ZeroEnergy);
    }
    s_grid
        .iter()
        .map(|&s| {
            let params = Params::new(n, p, s)?;
            let hardy = hardy_lhs(field, s, p, n)?;
            let sobolev = sobolev_lhs(field, s, p, n)?;
            let e = energy(field, potential, &params, engine)?;
            if !(e.value > 0.0) {
                return Err(FracError::ZeroEnergy);
            }
            Ok(HardyRow {
                s,
                hardy_ratio: hardy.value / e.value,
                sobolev_ratio: sobolev.value / e.value,
                hardy,
                sobolev,
                energy: e,
            })
        })
        .collect()
}

/// P_s(E; A) split into its two terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerimeterEstimate {
    /// ∫_E∫_{E^c}|x − y|^{−n−s}.
    pub cross: f64,
    pub cross_error: f64,
    /// ½∫_E∫_E|1 − e^{iφ}||x − y|^{−n−s}; zero when A = 0.
    pub interaction: f64,
    pub interaction_error: f64,
    pub total: EnergyEstimate,
}

/// Magnetic s-perimeter of a bounded convex region. `det` handles n ≤ 2,
/// `mc` and `split` n ≤ 4.
pub fn perimeter_ps(
    region: &SetRegion,
    potential: &VectorPotential,
    s: f64,
    engine: &EngineSpec,
) -> Result<PerimeterEstimate> {
    validate_s(s)?;
    let flavor = Default::default();
    let parts = match engine.method {
        Method::Det => ray_det(region, potential, 1.0, s, flavor, engine)?,
        Method::Mc | Method::Split => ray_mc(region, potential, 1.0, s, flavor, engine)?,
    };
    let interaction = 0.5 * parts.interaction;
    let interaction_error = 0.5 * parts.interaction_error;
    let mut total = EnergyEstimate::zero(engine.method, (engine.method != Method::Det).then_some(engine.seed));
    total.value = parts.cross + interaction;
    total.stat_error = parts.cross_error.hypot(interaction_error);
    if engine.method == Method::Det {
        // refinement differences are reported separately from statistical error
        total.stat_error = 0.0;
    }
    total.budget = Budget { samples: parts.samples, evaluations: parts.evaluations };
    total.r_max = f64::INFINITY;
    total.refinement = parts.refinement.iter().map(|[c, i]| c + 0.5 * i).collect();
    Ok(PerimeterEstimate { cross: parts.cross, cross_error: parts.cross_error, interaction, interaction_error, total })
}

/// Which small-s constant a perimeter scan agrees with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantVerdict {
    /// (2π^{n/2}/Γ(n/2))·|E|, the value implied by the energy limit at p = 1.
    Implied,
    /// (4π^{n/2}/Γ(n/2))·|E|.
    Displayed,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerimeterLimitReport {
    pub rows: Vec<ScanRow>,
    pub fit: LimitFit,
    pub measure: f64,
    pub implied_limit: f64,
    pub displayed_limit: f64,
    pub implied_gap: f64,
    pub displayed_gap: f64,
    pub verdict: ConstantVerdict,
}

/// Relative gap accepted as agreement in a perimeter verdict.
pub const PERIMETER_AGREEMENT: f64 = 0.03;

/// s·P_s along a grid toward 0, extrapolated, and compared against both
/// candidate constants.
pub fn perimeter_limit_scan(
    region: &SetRegion,
    potential: &VectorPotential,
    s_grid: &[f64],
    engine: &EngineSpec,
    model: LimitModel,
) -> Result<PerimeterLimitReport> {
    if Endpoint::infer(s_grid)? != Endpoint::Zero || s_grid.len() < 2 {
        return Err(FracError::params("perimeter scans need a grid decreasing toward 0"));
    }
    let rows: Vec<ScanRow> = s_grid
        .par_iter()
        .map(|&s| Ok(ScanRow::new(s, perimeter_ps(region, potential, s, engine)?.total, Endpoint::Zero)))
        .collect::<Result<_>>()?;
    let fit = extrapolate(&rows, Endpoint::Zero, model)?;
    let n = region.dimension();
    let measure = region.measure();
    let implied_limit = sphere_area(n) * measure;
    let displayed_limit = 2.0 * implied_limit;
    let implied_gap = (fit.limit - implied_limit).abs() / implied_limit;
    let displayed_gap = (fit.limit - displayed_limit).abs() / displayed_limit;
    let verdict = if implied_gap <= PERIMETER_AGREEMENT && implied_gap <= displayed_gap {
        ConstantVerdict::Implied
    } else if displayed_gap <= PERIMETER_AGREEMENT {
        ConstantVerdict::Displayed
    } else {
        ConstantVerdict::Neither
    };
    Ok(PerimeterLimitReport { rows, fit, measure, implied_limit, displayed_limit, implied_gap, displayed_gap, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::sync::Arc;

    #[test]
    fn margin_examples() {
        let one = ScalarField::custom(1, "one", 10.0, Arc::new(|_: &[f64]| Complex64::new(1.0, 0.0))).unwrap();
        let a = VectorPotential::constant(vec![1.0]).unwrap();
        let m = diamagnetic_margin(&one, &a, &[0.0], &[std::f64::consts::PI]);
        assert_relative_eq!(m, 2.0, max_relative = 1e-14);
        let g = ScalarField::gaussian(2, 1.0).unwrap();
        let zero = VectorPotential::zero(2);
        assert!(diamagnetic_margin(&g, &zero, &[0.1, 0.2], &[-0.4, 0.3]).abs() < 1e-15);
    }

    #[test]
    fn zero_potential_audit_has_nonnegative_margin() {
        let g = ScalarField::gaussian(2, 1.0).unwrap();
        let r = diamagnetic_audit(&g, &VectorPotential::zero(2), 2, 100_000, 4).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.worst_margin >= 0.0);
        assert_eq!(r.samples, 100_000);
    }

    #[test]
    fn audit_is_reproducible() {
        let g = ScalarField::gaussian(2, 1.0).unwrap();
        let a = VectorPotential::rotational(2, 2.0).unwrap();
        let r1 = diamagnetic_audit(&g, &a, 2, 70_000, 9).unwrap();
        let r2 = diamagnetic_audit(&g, &a, 2, 70_000, 9).unwrap();
        assert_eq!(r1, r2);
        assert!(diamagnetic_audit(&g, &a, 2, 0, 9).is_err());
    }

    #[test]
    fn hardy_examples() {
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        let h = hardy_lhs(&g, 0.25, 2.0, 1).unwrap();
        // ∫|x|^{−1/2}e^{−2x²} = 2^{−1/4}Γ(1/4)
        assert_relative_eq!(h.value, 2f64.powf(-0.25) * gamma(0.25), max_relative = 1e-9);
        let near_zero = hardy_lhs(&g, 1e-3, 2.0, 1).unwrap();
        let a = 1.0 - 2e-3;
        assert_relative_eq!(near_zero.value, 2f64.powf(-a / 2.0) * gamma(a / 2.0), max_relative = 1e-9);
        // the deviation from ‖u‖₂² is O(σ)
        assert_relative_eq!(near_zero.value, (std::f64::consts::PI / 2.0).sqrt(), max_relative = 1e-2);
        assert_eq!(hardy_lhs(&ScalarField::zero(1), 0.25, 2.0, 1).unwrap().value, 0.0);
        assert!(hardy_lhs(&g, 0.75, 2.0, 1).is_err());
    }

    #[test]
    fn hardy_indicator_ball_is_exact() {
        let ball = ScalarField::indicator(SetRegion::unit_ball(2));
        let h = hardy_lhs(&ball, 0.5, 1.0, 2).unwrap();
        // 2π·∫_0^1 r^{1−1/2} dr
        assert_relative_eq!(h.value, 2.0 * std::f64::consts::PI / 1.5, max_relative = 1e-12);
    }

    #[test]
    fn sobolev_gaussian_closed_form() {
        let g = ScalarField::gaussian(2, 1.0).unwrap();
        let v = sobolev_lhs(&g, 0.5, 2.0, 2).unwrap();
        // q = 4, ‖u‖_4^4 = π/4
        assert_relative_eq!(v.value, (std::f64::consts::PI / 4.0).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn zero_field_ratio_is_rejected() {
        let r = hardy_ratio_scan(&ScalarField::zero(1), &VectorPotential::zero(1), 2.0, 1, &[0.2], &EngineSpec::det());
        assert!(matches!(r, Err(FracError::ZeroEnergy)));
    }

    #[test]
    fn interval_perimeter_closed_form() {
        let e = SetRegion::cube(vec![-0.5], vec![0.5]).unwrap();
        let p = perimeter_ps(&e, &VectorPotential::zero(1), 0.5, &EngineSpec::det()).unwrap();
        assert_eq!(p.interaction, 0.0);
        assert_relative_eq!(p.total.value, 8.0, max_relative = 1e-14);
    }
}
