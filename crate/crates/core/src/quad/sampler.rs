//! Importance densities for pairs (x, y = x + rθ).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::kernel::{numerator_from, pnorm_pow};
use crate::model::{FieldKind, Params, ScalarField, VectorPotential};
use crate::special::sphere_area;

/// Largest supported dimension of the sampling engines.
pub(crate) const MAX_DIM: usize = 4;

/// ∫_a^b u^{e−1} du given ln a, ln b.
fn power_mass(e: f64, ln_a: f64, ln_b: f64) -> f64 {
    if ln_b <= ln_a {
        return 0.0;
    }
    if e.abs() < 1e-12 {
        ln_b - ln_a
    } else {
        ((e * ln_b).exp() - (e * ln_a).exp()) / e
    }
}

/// Inverse CDF of u^{e−1} on [a, b], returning ln u.
fn power_inverse(e: f64, ln_a: f64, ln_b: f64, v: f64) -> f64 {
    if e.abs() < 1e-12 {
        return ln_a + v * (ln_b - ln_a);
    }
    let lo = (e * ln_a).exp();
    let hi = (e * ln_b).exp();
    let t = lo + v * (hi - lo);
    (t.ln() / e).clamp(ln_a, ln_b)
}

/// Two-piece radial law on (r_min, r_max) in units u = r/ℓ: density ∝
/// u^{q−1−σ} for u ≤ 1 and u^{−1−σ} for u > 1, continuous at u = 1.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialLaw {
    pub ell: f64,
    ln_u0: f64,
    ln_u1: f64,
    q: f64,
    sigma: f64,
    m1: f64,
    total: f64,
}

impl RadialLaw {
    pub fn new(ell: f64, ln_r_min: f64, ln_r_max: f64, q: f64, sigma: f64) -> Self {
        let ln_ell = ell.ln().clamp(ln_r_min, ln_r_max);
        let ln_u0 = ln_r_min - ln_ell;
        let ln_u1 = ln_r_max - ln_ell;
        let m1 = power_mass(q - sigma, ln_u0, 0.0);
        let m2 = power_mass(-sigma, 0.0, ln_u1);
        RadialLaw { ell: ln_ell.exp(), ln_u0, ln_u1, q, sigma, m1, total: m1 + m2 }
    }

    /// Draw ln u and the factor F with r^{−1−σ}/f(r) = ℓ^{−σ}·F.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let v: f64 = rng.random::<f64>() * self.total;
        if v < self.m1 {
            let ln_u = power_inverse(self.q - self.sigma, self.ln_u0, 0.0, v / self.m1);
            (ln_u, self.total * (-self.q * ln_u).exp())
        } else {
            let w = ((v - self.m1) / (self.total - self.m1)).min(1.0);
            let ln_u = power_inverse(-self.sigma, 0.0, self.ln_u1, w);
            (ln_u, self.total)
        }
    }
}

/// Uniform direction on S^{n−1}.
#[inline]
pub(crate) fn direction<R: Rng + ?Sized>(rng: &mut R, n: usize, out: &mut [f64]) {
    if n == 1 {
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut s = 0.0;
        for v in out.iter_mut().take(n) {
            let g: f64 = rng.sample(StandardNormal);
            *v = g;
            s += g * g;
        }
        if s > 1e-20 {
            let inv = s.sqrt().recip();
            out.iter_mut().take(n).for_each(|v| *v *= inv);
            return;
        }
    }
}

/// One weighted pair draw.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Draw {
    pub x: [f64; MAX_DIM],
    pub y: [f64; MAX_DIM],
    /// Importance-weighted integrand of the pair.
    pub pair: f64,
    /// Importance-weighted leading-order mass of {|z| < r_min} at the anchor.
    pub near: f64,
    /// Whether the near-diagonal pair at the anchor has |y| ≥ |x|.
    pub near_outward: bool,
}

/// Pair sampler: anchor a ~ N(c, τ²), z = rθ with r from [`RadialLaw`], and a
/// fair coin deciding whether the anchor is x or y. The pair density is
/// ½ q_z(z)(q(x) + q(y)).
pub(crate) struct PairSampler<'a> {
    field: &'a ScalarField,
    potential: &'a VectorPotential,
    params: Params,
    n: usize,
    center: [f64; MAX_DIM],
    tau: f64,
    law: RadialLaw,
    /// |S^{n−1}|·ℓ^{−σ}
    kernel_scale: f64,
    /// (2πτ²)^{−n/2}
    anchor_norm: f64,
    /// r_min^{p−σ}/(p − σ)·|S^{n−1}|, or 0 when no near term is sampled.
    near_scale: f64,
    near_mode: NearMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum NearMode {
    None,
    Gradient,
    FiniteDifference,
    /// u is piecewise constant; only −iAu survives away from ∂E.
    Potential,
}

impl<'a> PairSampler<'a> {
    pub fn new(
        field: &'a ScalarField,
        potential: &'a VectorPotential,
        params: &Params,
        r_min: f64,
        ln_r_max: f64,
    ) -> Self {
        let n = params.n;
        let sigma = params.sp();
        let indicator = matches!(field.kind(), FieldKind::Indicator(_));
        // near order: the numerator vanishes like r^p for smooth u; for
        // indicators the square-root rule balances the boundary layer
        let q = if indicator { 0.5 } else { params.p };
        let ell = field.length_scale();
        let law = RadialLaw::new(ell, r_min.ln(), ln_r_max, q, sigma);
        let tau = match field.kind() {
            FieldKind::Gaussian { width } | FieldKind::PlaneWave { width, .. } => width / params.p.sqrt(),
            _ => 0.6 * ell,
        };
        let mut center = [0.0; MAX_DIM];
        for (c, v) in center.iter_mut().zip(field.center()) {
            *c = v;
        }
        let near_mode = if indicator {
            if potential.is_zero() {
                NearMode::None
            } else {
                NearMode::Potential
            }
        } else if field.has_gradient() {
            NearMode::Gradient
        } else {
            NearMode::FiniteDifference
        };
        let p = params.p;
        let near_scale = sphere_area(n) * (r_min.ln() * (p - sigma)).exp() / (p - sigma);
        PairSampler {
            field,
            potential,
            params: *params,
            n,
            center,
            tau,
            law,
            kernel_scale: sphere_area(n) * (-sigma * law.ell.ln()).exp(),
            anchor_norm: (2.0 * std::f64::consts::PI * tau * tau).powf(-0.5 * n as f64),
            near_scale,
            near_mode,
        }
    }

    #[inline]
    fn anchor_density(&self, x: &[f64]) -> f64 {
        let d2: f64 = x[..self.n].iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        self.anchor_norm * (-0.5 * d2 / (self.tau * self.tau)).exp()
    }

    /// |θ·(∇u − iAu)(a)|^p in the configured flavor.
    fn directional_slope(&self, a: &[f64], theta: &[f64]) -> f64 {
        let n = self.n;
        let mut amag = [0.0; MAX_DIM];
        self.potential.eval_into(a, &mut amag[..n]);
        let u = self.field.value(a);
        let mut acc = Complex64::new(0.0, 0.0);
        match self.near_mode {
            NearMode::None => return 0.0,
            NearMode::Gradient => {
                let mut g = [Complex64::new(0.0, 0.0); MAX_DIM];
                // catalog fields with gradients never fail here
                let _ = self.field.gradient_into(a, &mut g[..n]);
                for k in 0..n {
                    acc += theta[k] * g[k];
                }
            }
            NearMode::FiniteDifference => {
                let h = 1e-6 * self.law.ell.max(1e-300);
                let mut xp = [0.0; MAX_DIM];
                let mut xm = [0.0; MAX_DIM];
                for k in 0..n {
                    xp[k] = a[k] + h * theta[k];
                    xm[k] = a[k] - h * theta[k];
                }
                acc = (self.field.value(&xp[..n]) - self.field.value(&xm[..n])) / (2.0 * h);
            }
            NearMode::Potential => {
                if u.re == 0.0 && u.im == 0.0 {
                    return 0.0;
                }
            }
        }
        let ta: f64 = (0..n).map(|k| theta[k] * amag[k]).sum();
        acc -= Complex64::new(0.0, ta) * u;
        pnorm_pow(acc, self.params.p, self.params.norm_flavor)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, d: &mut Draw) {
        let n = self.n;
        let mut a = [0.0; MAX_DIM];
        for (ak, ck) in a[..n].iter_mut().zip(&self.center) {
            let g: f64 = rng.sample(StandardNormal);
            *ak = ck + self.tau * g;
        }
        let mut theta = [0.0; MAX_DIM];
        direction(rng, n, &mut theta);
        let (ln_u, factor) = self.law.sample(rng);
        let r = self.law.ell * ln_u.exp();
        let anchor_is_x: bool = rng.random();
        for k in 0..n {
            let far = a[k] + r * theta[k];
            if anchor_is_x {
                d.x[k] = a[k];
                d.y[k] = far;
            } else {
                d.x[k] = far;
                d.y[k] = a[k];
            }
        }
        let (x, y) = (&d.x[..n], &d.y[..n]);
        let ux = self.field.value(x);
        let uy = self.field.value(y);
        d.pair = if (ux.re == 0.0 && ux.im == 0.0) && (uy.re == 0.0 && uy.im == 0.0) {
            0.0
        } else {
            let num = numerator_from(self.potential, &self.params, x, y, ux, uy);
            if num == 0.0 {
                0.0
            } else {
                let dens = self.anchor_density(x) + self.anchor_density(y);
                2.0 * num * self.kernel_scale * factor / dens
            }
        };
        d.near = if self.near_mode == NearMode::None {
            0.0
        } else {
            let slope = self.directional_slope(&a[..n], &theta[..n]);
            if slope == 0.0 {
                0.0
            } else {
                self.near_scale * slope / self.anchor_density(&a[..n])
            }
        };
        d.near_outward = (0..n).map(|k| a[k] * theta[k]).sum::<f64>() >= 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn radial_law_weights_are_unbiased() {
        // E[r^{−1−σ}/f(r)·1] over (r_min, R) equals ∫ r^{−1−σ} dr
        let sigma = 0.3;
        let (r_min, r_max): (f64, f64) = (1e-3, 1e4);
        let law = RadialLaw::new(0.7, r_min.ln(), r_max.ln(), 2.0, sigma);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = 400_000;
        let mut acc = 0.0;
        for _ in 0..m {
            let (ln_u, factor) = law.sample(&mut rng);
            let r = law.ell * ln_u.exp();
            assert!(r >= r_min * 0.999_999 && r <= r_max * 1.000_001);
            // integrate g(r) = r^{−1−σ}·min(r, 1)^2 to exercise both pieces
            acc += (-sigma * law.ell.ln()).exp() * factor * r.min(1.0).powi(2);
        }
        let est = acc / m as f64;
        let exact = (1.0 - r_min.powf(2.0 - sigma)) / (2.0 - sigma) + (1.0 - r_max.powf(-sigma)) / sigma;
        assert_relative_eq!(est, exact, max_relative = 1e-2);
    }

    #[test]
    fn huge_radius_stays_finite() {
        let law = RadialLaw::new(1.0, (1e-6f64).ln(), 690.0, 2.0, 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let (ln_u, f) = law.sample(&mut rng);
            assert!(ln_u.is_finite() && f.is_finite() && ln_u <= 690.0);
        }
    }

    #[test]
    fn directions_are_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = [0.0; MAX_DIM];
        for n in 1..=4 {
            for _ in 0..1000 {
                direction(&mut rng, n, &mut t);
                let s: f64 = t[..n].iter().map(|v| v * v).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }
}
