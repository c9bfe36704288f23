//! Limit constants, the normalization c(n, s), s-scans and extrapolation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::gauss::{composite, graded_breaks_both, uniform_breaks, GaussLegendre};
use crate::kernel::complex_vec_pnorm;
use crate::model::{
    validate_np, validate_s, EnergyEstimate, LimitFit, LimitModel, NormFlavor, Params, ScalarField, VectorPotential,
};
use crate::quad::{energy, EngineSpec};
use crate::special::{gamma, sphere_area};

/// Small-s constant 4π^{n/2}/(pΓ(n/2)).
pub fn ms_constant(n: usize, p: f64) -> f64 {
    let h = n as f64 / 2.0;
    4.0 * std::f64::consts::PI.powf(h) / (p * gamma(h))
}

/// Q_{p,n} = (1/p)∫_{S^{n−1}}|ω·h|^p dH(h) = 2π^{(n−1)/2}Γ((p+1)/2)/(pΓ((n+p)/2)).
pub fn bbm_constant(p: f64, n: usize) -> f64 {
    if n == 1 {
        return 2.0 / p;
    }
    let nf = n as f64;
    2.0 * std::f64::consts::PI.powf((nf - 1.0) / 2.0) * gamma((p + 1.0) / 2.0) / (p * gamma((nf + p) / 2.0))
}

/// Q_{p,n} by direct sphere quadrature about the unit vector `omega`, n ≤ 3.
pub fn bbm_constant_quadrature(p: f64, omega: &[f64]) -> Result<f64> {
    let n = omega.len();
    validate_np(n, p)?;
    let norm = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(FracError::params("reference vector must be nonzero"));
    }
    let w: Vec<f64> = omega.iter().map(|v| v / norm).collect();
    let rule = GaussLegendre::new(16);
    let integral = match n {
        1 => 2.0,
        2 => circle_abs_pow(&rule, p, w[0], w[1], 0.0),
        3 => {
            // h = (√(1−z²)cos θ, √(1−z²)sin θ, z); the zero set of ω·h is tangent to z = ±R
            let r = (w[0] * w[0] + w[1] * w[1]).sqrt();
            let mut breaks = vec![-1.0, -r, r, 1.0];
            breaks.dedup();
            let mut total = 0.0;
            for win in breaks.windows(2) {
                let nodes = composite(&rule, &graded_breaks_both(win[0], win[1], 0.15, 40, 4));
                for (z, wz) in nodes {
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    total += wz * circle_abs_pow(&rule, p, rho * w[0], rho * w[1], w[2] * z);
                }
            }
            total
        }
        _ => return Err(FracError::UnsupportedDimension { engine: "sphere quadrature", max: 3, got: n }),
    };
    Ok(integral / p)
}

/// ∫_0^{2π}|a cos θ + b sin θ + c|^p dθ, split at the zeros of the linear form.
fn circle_abs_pow(rule: &GaussLegendre, p: f64, a: f64, b: f64, c: f64) -> f64 {
    use std::f64::consts::PI;
    let amp = (a * a + b * b).sqrt();
    let alpha = b.atan2(a);
    let mut breaks = vec![alpha, alpha + 2.0 * PI];
    if amp > 0.0 && c.abs() < amp {
        let d = (-c / amp).acos();
        breaks = vec![alpha - d, alpha + d, alpha + 2.0 * PI - d];
    }
    let mut total = 0.0;
    for win in breaks.windows(2) {
        for (t, wt) in composite(rule, &graded_breaks_both(win[0], win[1], 0.15, 40, 4)) {
            total += wt * (amp * (t - alpha).cos() + c).abs().powf(p);
        }
    }
    total
}

/// c(n, s) = s·4^s·Γ(n/2 + s)/(π^{n/2}Γ(1 − s)).
pub fn cns_normalization(n: usize, s: f64) -> Result<f64> {
    validate_s(s)?;
    if n < 1 {
        return Err(FracError::params("n must be >= 1"));
    }
    let h = n as f64 / 2.0;
    Ok(s * 4f64.powf(s) * gamma(h + s) / (std::f64::consts::PI.powf(h) * gamma(1.0 - s)))
}

/// Exact E_{s,2,0} of e^{−|x|²} from the Fourier side, n ∈ {1, 2, 3}.
pub fn gaussian_reference_energy(n: usize, s: f64) -> Result<f64> {
    if !(1..=3).contains(&n) {
        return Err(FracError::UnsupportedDimension { engine: "gaussian reference", max: 3, got: n });
    }
    let c = cns_normalization(n, s)?;
    let h = n as f64 / 2.0;
    Ok((2.0 / c) * 2f64.powi(-(n as i32)) * sphere_area(n) * 2f64.powf(s + h - 1.0) * gamma(s + h))
}

/// Quadrature value with an error estimate from two resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// ∫|∇u − iAu|^p over R^n, n ≤ 3.
pub fn magnetic_gradient_energy(
    field: &ScalarField,
    potential: &VectorPotential,
    p: f64,
    flavor: NormFlavor,
) -> Result<Integral> {
    let n = field.dimension();
    validate_np(n, p)?;
    crate::error::check_dim(n, potential.dimension())?;
    if field.is_zero() {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    if !field.has_gradient() {
        return Err(FracError::GradientUnavailable(field.label().to_string()));
    }
    if n > 3 {
        return Err(FracError::UnsupportedDimension { engine: "gradient quadrature", max: 3, got: n });
    }
    let panels = [0, 48, 20, 8][n];
    let coarse = gradient_quadrature(field, potential, p, flavor, panels)?;
    let fine = gradient_quadrature(field, potential, p, flavor, 2 * panels)?;
    Ok(Integral { value: fine, error: (fine - coarse).abs() + 1e-14 * fine.abs() })
}

fn gradient_quadrature(
    field: &ScalarField,
    potential: &VectorPotential,
    p: f64,
    flavor: NormFlavor,
    panels: usize,
) -> Result<f64> {
    let n = field.dimension();
    let rho = field.integration_radius(p);
    let center = field.center();
    let rule = GaussLegendre::new(8);
    let axes: Vec<Vec<(f64, f64)>> =
        (0..n).map(|k| composite(&rule, &uniform_breaks(center[k] - rho, center[k] + rho, panels))).collect();
    let outer = &axes[0];
    let parts: Vec<Result<f64>> = outer
        .par_iter()
        .map(|(x0, w0)| {
            let mut x = vec![0.0; n];
            let mut grad = vec![Complex64::new(0.0, 0.0); n];
            let mut a = vec![0.0; n];
            x[0] = *x0;
            let mut sum = 0.0;
            let inner: usize = axes[1..].iter().map(|v| v.len()).product();
            for idx in 0..inner {
                let mut rem = idx;
                let mut w = *w0;
                for k in 1..n {
                    let (xk, wk) = axes[k][rem % axes[k].len()];
                    rem /= axes[k].len();
                    x[k] = xk;
                    w *= wk;
                }
                field.gradient_into(&x, &mut grad)?;
                let u = field.value(&x);
                potential.eval_into(&x, &mut a);
                for k in 0..n {
                    grad[k] -= Complex64::new(0.0, a[k]) * u;
                }
                sum += w * complex_vec_pnorm(&grad, p, flavor).powf(p);
            }
            Ok(sum)
        })
        .collect();
    parts.into_iter().sum()
}

/// Endpoint approached by a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    /// s ↘ 0, scaled = s·E_s.
    Zero,
    /// s ↗ 1, scaled = (1 − s)·E_s.
    One,
}

impl Endpoint {
    /// Read the direction off a monotone grid; a single point goes to the nearer end.
    pub fn infer(s_grid: &[f64]) -> Result<Endpoint> {
        match s_grid {
            [] => Ok(Endpoint::Zero),
            [s] => Ok(if *s <= 0.5 { Endpoint::Zero } else { Endpoint::One }),
            _ => {
                if s_grid.windows(2).all(|w| w[1] < w[0]) {
                    Ok(Endpoint::Zero)
                } else if s_grid.windows(2).all(|w| w[1] > w[0]) {
                    Ok(Endpoint::One)
                } else {
                    Err(FracError::params("s grid must be strictly monotone"))
                }
            }
        }
    }

    /// Distance σ from s to the endpoint.
    pub fn distance(&self, s: f64) -> f64 {
        match self {
            Endpoint::Zero => s,
            Endpoint::One => 1.0 - s,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Endpoint::Zero => "zero",
            Endpoint::One => "one",
        }
    }
}

/// One grid point of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub s: f64,
    pub energy: EnergyEstimate,
    /// σ·energy.value with σ the distance to the scan's endpoint.
    pub scaled: f64,
}

impl ScanRow {
    pub fn new(s: f64, energy: EnergyEstimate, endpoint: Endpoint) -> Self {
        let scaled = endpoint.distance(s) * energy.value;
        ScanRow { s, energy, scaled }
    }

    /// Error of `scaled` propagated from the energy's combined error.
    pub fn scaled_error(&self, endpoint: Endpoint) -> f64 {
        endpoint.distance(self.s) * self.energy.total_error()
    }
}

/// Energies along `s_grid` with the same engine and seed at every point.
pub fn scan(
    field: &ScalarField,
    potential: &VectorPotential,
    params: &Params,
    s_grid: &[f64],
    engine: &EngineSpec,
) -> Result<Vec<ScanRow>> {
    let endpoint = Endpoint::infer(s_grid)?;
    for s in s_grid {
        validate_s(*s)?;
    }
    s_grid
        .par_iter()
        .map(|s| {
            let p = params.with_s(*s)?;
            Ok(ScanRow::new(*s, energy(field, potential, &p, engine)?, endpoint))
        })
        .collect()
}

/// Least-squares limit of the scaled column as σ → 0.
///
/// `LinearInS`: L + aσ. `SLogS`: L + aσ + bσ ln σ. `Richardson`: the
/// polynomial in σ of degree rows − 1 through every row.
pub fn extrapolate(rows: &[ScanRow], endpoint: Endpoint, model: LimitModel) -> Result<LimitFit> {
    let sigma: Vec<f64> = rows.iter().map(|r| endpoint.distance(r.s)).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.scaled).collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.scaled_error(endpoint)).collect();
    let s_grid: Vec<f64> = rows.iter().map(|r| r.s).collect();
    extrapolate_points(&s_grid, &sigma, &values, &errors, model)
}

pub(crate) fn extrapolate_points(
    s_grid: &[f64],
    sigma: &[f64],
    values: &[f64],
    errors: &[f64],
    model: LimitModel,
) -> Result<LimitFit> {
    let m = sigma.len();
    if m < 3 {
        return Err(FracError::params(format!("extrapolation needs at least 3 rows, got {m}")));
    }
    if !sigma.windows(2).all(|w| w[1] < w[0]) {
        return Err(FracError::params("grid must approach the endpoint strictly monotonically"));
    }
    if sigma.iter().any(|v| !(*v > 0.0)) {
        return Err(FracError::params("grid points must lie strictly inside (0, 1)"));
    }
    let cols = match model {
        LimitModel::LinearInS => 2,
        LimitModel::SLogS => 3,
        LimitModel::Richardson => m,
    };
    // column scaling keeps the Vandermonde design well conditioned
    let h = sigma.iter().cloned().fold(0.0, f64::max);
    let design = DMatrix::from_fn(m, cols, |i, j| {
        let t = sigma[i] / h;
        match (model, j) {
            (_, 0) => 1.0,
            (LimitModel::SLogS, 2) => t * sigma[i].ln(),
            (_, j) => t.powi(j as i32),
        }
    });
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(FracError::RankDeficient(format!(
            "{cols} coefficients from {m} rows (condition {:.1e})",
            smax / smin
        )));
    }
    let y = DVector::from_column_slice(values);
    let pinv = svd.pseudo_inverse(0.0).map_err(|e| FracError::RankDeficient(e.to_string()))?;
    let coef = &pinv * &y;
    let fitted = &design * &coef;
    let residual = ((fitted - &y).norm_squared() / m as f64).sqrt();
    let limit_error = (0..m).map(|i| (pinv[(0, i)] * errors[i]).powi(2)).sum::<f64>().sqrt();
    let coefficients: Vec<f64> = coef
        .iter()
        .enumerate()
        .map(|(j, c)| match (model, j) {
            (_, 0) => *c,
            (LimitModel::SLogS, 2) => c / h,
            (_, j) => c / h.powi(j as i32),
        })
        .collect();
    Ok(LimitFit { limit: coef[0], limit_error, coefficients, residual, s_grid: s_grid.to_vec(), model })
}
