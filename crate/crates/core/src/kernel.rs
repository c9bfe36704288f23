//! Pointwise magnetic difference kernel and the Gagliardo integrand.

use num_complex::Complex64;

use crate::error::{check_dim, FracError, Result};
use crate::model::{NormFlavor, Params, ScalarField, VectorPotential};

/// An integration pair (x, y) with its quadrature or importance weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub weight: f64,
}

/// (x − y)·A((x + y)/2).
pub fn midpoint_phase(potential: &VectorPotential, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(potential.dimension(), x.len())?;
    check_dim(potential.dimension(), y.len())?;
    Ok(potential.phase(x, y))
}

/// u(x) − e^{iφ} u(y) with φ the midpoint phase.
pub fn magnetic_difference(
    field: &ScalarField,
    potential: &VectorPotential,
    x: &[f64],
    y: &[f64],
) -> Result<Complex64> {
    check_dim(field.dimension(), x.len())?;
    check_dim(field.dimension(), y.len())?;
    check_dim(potential.dimension(), x.len())?;
    Ok(difference(field, potential, x, y))
}

/// Unchecked magnetic difference. The phase is skipped when u(y) = 0 so that
/// far-apart pairs never evaluate A at huge arguments.
#[inline]
pub(crate) fn difference(field: &ScalarField, potential: &VectorPotential, x: &[f64], y: &[f64]) -> Complex64 {
    let ux = field.value(x);
    let uy = field.value(y);
    if uy.re == 0.0 && uy.im == 0.0 {
        return ux;
    }
    let phi = potential.phase(x, y);
    if phi == 0.0 {
        return ux - uy;
    }
    ux - Complex64::from_polar(1.0, phi) * uy
}

/// |z| in the selected flavor.
#[inline]
pub fn complex_pnorm(z: Complex64, p: f64, flavor: NormFlavor) -> f64 {
    match flavor {
        NormFlavor::Euclid => z.norm(),
        NormFlavor::SplitP => (z.re.abs().powf(p) + z.im.abs().powf(p)).powf(1.0 / p),
    }
}

/// |v| for a complex vector; split_p uses the Euclidean lengths of the real
/// and imaginary parts.
pub fn complex_vec_pnorm(v: &[Complex64], p: f64, flavor: NormFlavor) -> f64 {
    match flavor {
        NormFlavor::Euclid => v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        NormFlavor::SplitP => {
            let re = v.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
            let im = v.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
            (re.powf(p) + im.powf(p)).powf(1.0 / p)
        }
    }
}

/// complex_pnorm(z)^p without the round trip through the 1/p root.
#[inline]
pub(crate) fn pnorm_pow(z: Complex64, p: f64, flavor: NormFlavor) -> f64 {
    match flavor {
        NormFlavor::Euclid => {
            let m2 = z.norm_sqr();
            if p == 2.0 {
                m2
            } else if p == 1.0 {
                m2.sqrt()
            } else {
                m2.powf(0.5 * p)
            }
        }
        NormFlavor::SplitP => {
            if p == 2.0 {
                z.norm_sqr()
            } else {
                z.re.abs().powf(p) + z.im.abs().powf(p)
            }
        }
    }
}

/// Numerator |u(x) − e^{iφ}u(y)|^p, unchecked. The phase is only evaluated
/// when it can change the result, so one point may sit at a huge distance.
#[inline]
pub(crate) fn numerator(
    field: &ScalarField,
    potential: &VectorPotential,
    params: &Params,
    x: &[f64],
    y: &[f64],
) -> f64 {
    let ux = field.value(x);
    let uy = field.value(y);
    numerator_from(potential, params, x, y, ux, uy)
}

#[inline]
pub(crate) fn numerator_from(
    potential: &VectorPotential,
    params: &Params,
    x: &[f64],
    y: &[f64],
    ux: Complex64,
    uy: Complex64,
) -> f64 {
    let (p, flavor) = (params.p, params.norm_flavor);
    let uy_zero = uy.re == 0.0 && uy.im == 0.0;
    if uy_zero {
        return pnorm_pow(ux, p, flavor);
    }
    let ux_zero = ux.re == 0.0 && ux.im == 0.0;
    if ux_zero && flavor == NormFlavor::Euclid {
        return pnorm_pow(uy, p, flavor);
    }
    let phi = potential.phase(x, y);
    if phi == 0.0 {
        return pnorm_pow(ux - uy, p, flavor);
    }
    if !phi.is_finite() {
        // only reachable with one point at overflow distance
        return pnorm_pow(ux, p, flavor) + pnorm_pow(uy, p, flavor);
    }
    pnorm_pow(ux - Complex64::from_polar(1.0, phi) * uy, p, flavor)
}

/// |u(x) − e^{iφ}u(y)|^p / |x − y|^{n+ps}. Rejects the diagonal.
pub fn integrand(
    field: &ScalarField,
    potential: &VectorPotential,
    params: &Params,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    params.validate()?;
    check_dim(params.n, x.len())?;
    check_dim(params.n, y.len())?;
    params.check_field(field, potential)?;
    let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if r2 == 0.0 {
        return Err(FracError::DiagonalInput);
    }
    // evaluated in lexicographic order so the swap symmetry is exact in floating point
    let (x, y) = if x.partial_cmp(y) == Some(std::cmp::Ordering::Greater) { (y, x) } else { (x, y) };
    let num = numerator(field, potential, params, x, y);
    if num == 0.0 {
        return Ok(0.0);
    }
    let expo = params.n as f64 + params.sp();
    Ok(num * (-0.5 * expo * r2.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SetRegion;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    fn one_field(n: usize) -> ScalarField {
        ScalarField::custom(n, "one", 10.0, Arc::new(|_x: &[f64]| Complex64::new(1.0, 0.0))).unwrap()
    }

    #[test]
    fn phase_examples() {
        assert_eq!(midpoint_phase(&VectorPotential::zero(2), &[1.0, 2.0], &[3.0, 4.0]).unwrap(), 0.0);
        let c = VectorPotential::constant(vec![1.0, 0.0]).unwrap();
        assert_eq!(midpoint_phase(&c, &[1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        let r = VectorPotential::rotational(2, 2.0).unwrap();
        assert_eq!(midpoint_phase(&r, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), -1.0);
        assert!(midpoint_phase(&c, &[1.0], &[0.0]).is_err());
    }

    #[test]
    fn phase_is_antisymmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pots = [
            VectorPotential::constant(vec![0.3, -1.0]).unwrap(),
            VectorPotential::rotational(2, 1.7).unwrap(),
            VectorPotential::oscillatory(2, 1.0, 2.0).unwrap(),
        ];
        for pot in &pots {
            for _ in 0..1000 {
                let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let y = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                assert_eq!(pot.phase(&x, &y), -pot.phase(&y, &x));
            }
        }
    }

    #[test]
    fn difference_examples() {
        let zero = VectorPotential::zero(1);
        let one = one_field(1);
        assert_eq!(magnetic_difference(&one, &zero, &[0.3], &[5.0]).unwrap().norm(), 0.0);
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        let d = magnetic_difference(&g, &zero, &[0.0], &[1.0]).unwrap();
        assert_relative_eq!(d.re, 1.0 - (-1.0f64).exp(), max_relative = 1e-15);
        let a = VectorPotential::constant(vec![1.0]).unwrap();
        let d = magnetic_difference(&one, &a, &[1.0], &[0.0]).unwrap();
        assert_relative_eq!(d.norm(), 2.0 * 0.5f64.sin(), max_relative = 1e-14);
        assert_relative_eq!(d.norm(), 0.958_851, max_relative = 1e-6);
    }

    #[test]
    fn norm_flavors() {
        let z = Complex64::new(3.0, 4.0);
        assert_eq!(complex_pnorm(z, 2.0, NormFlavor::Euclid), 5.0);
        let w = Complex64::new(1.0, 1.0);
        assert_eq!(complex_pnorm(w, 1.0, NormFlavor::SplitP), 2.0);
        assert_relative_eq!(complex_pnorm(w, 2.0, NormFlavor::SplitP), 2f64.sqrt(), max_relative = 1e-15);
        for p in [1.0, 1.5, 2.0, 3.0] {
            for flavor in [NormFlavor::Euclid, NormFlavor::SplitP] {
                assert_relative_eq!(pnorm_pow(z, p, flavor), complex_pnorm(z, p, flavor).powf(p), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn integrand_examples() {
        let params = Params::new(1, 2.0, 0.5).unwrap();
        let zero = VectorPotential::zero(1);
        let ind = ScalarField::indicator(SetRegion::unit_ball(1));
        assert_eq!(integrand(&ind, &zero, &params, &[3.0], &[4.0]).unwrap(), 0.0);
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        let v = integrand(&g, &zero, &params, &[0.0], &[1.0]).unwrap();
        assert_relative_eq!(v, (1.0 - (-1.0f64).exp()).powi(2), max_relative = 1e-14);
        assert_relative_eq!(v, 0.399_576, max_relative = 1e-5);
        assert_eq!(integrand(&g, &zero, &params, &[0.5], &[0.5]), Err(FracError::DiagonalInput));
    }

    #[test]
    fn integrand_is_swap_symmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let params = Params::new(2, 1.5, 0.4).unwrap();
        let f = ScalarField::plane_wave(vec![1.0, 2.0], 1.0).unwrap();
        let pots = [VectorPotential::rotational(2, 2.0).unwrap(), VectorPotential::oscillatory(2, 1.0, 1.0).unwrap()];
        for pot in &pots {
            for _ in 0..100_000 {
                let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let y = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let a = integrand(&f, pot, &params, &x, &y).unwrap();
                let b = integrand(&f, pot, &params, &y, &x).unwrap();
                assert_eq!(a.to_bits(), b.to_bits(), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn phase_has_unit_modulus() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let pot = VectorPotential::rotational(3, 5.0).unwrap();
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..10.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..10.0)).collect();
            let e = Complex64::from_polar(1.0, pot.phase(&x, &y));
            assert!((e.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_potential_gauge_covariance() {
        // |u(x) − e^{i(x−y)·a}u(y)| = |ũ(x) − ũ(y)| with ũ = e^{−ix·a}u
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let a = vec![0.7, -1.3];
        let pot = VectorPotential::constant(a.clone()).unwrap();
        let f = ScalarField::plane_wave(vec![0.5, 1.0], 1.2).unwrap();
        for _ in 0..1_000_000 {
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let y = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let lhs = difference(&f, &pot, &x, &y).norm();
            let gauge = |p: &[f64; 2]| Complex64::from_polar(1.0, -(p[0] * a[0] + p[1] * a[1])) * f.value(p);
            let rhs = (gauge(&x) - gauge(&y)).norm();
            assert!((lhs - rhs).abs() <= 1e-12);
        }
    }
}
