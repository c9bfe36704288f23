use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{check_dim, FracError, Result};
use crate::gauss::{composite, graded_breaks_left, uniform_breaks, GaussLegendre};
use crate::model::SetRegion;
use crate::special::{sphere_area, unit_ball_volume};

pub type FieldFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// Host-provided field. Excluded from golden values.
#[derive(Clone)]
pub struct CustomField {
    pub label: String,
    pub eval: Arc<FieldFn>,
    /// |u| is negligible outside this ball about the origin.
    pub support_radius: f64,
}

impl fmt::Debug for CustomField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomField").field("label", &self.label).field("support_radius", &self.support_radius).finish()
    }
}

#[derive(Debug, Clone)]
pub enum FieldKind {
    Zero,
    /// e^{-|x|²/w²}
    Gaussian {
        width: f64,
    },
    /// exp(1 - r²/(r² - |x|²)) on |x| < r
    Bump {
        radius: f64,
    },
    Indicator(SetRegion),
    /// e^{i k·x} e^{-|x|²/w²}
    PlaneWave {
        frequency: Vec<f64>,
        width: f64,
    },
    Custom(CustomField),
}

/// Complex scalar field u: R^n → C from the closed-form catalog.
#[derive(Debug, Clone)]
pub struct ScalarField {
    kind: FieldKind,
    dim: usize,
}

/// ‖u‖_p^p together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpNorm {
    pub value: f64,
    pub error: f64,
    pub exact: bool,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(FracError::params(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ScalarField {
    pub fn zero(dim: usize) -> Self {
        ScalarField { kind: FieldKind::Zero, dim }
    }

    pub fn gaussian(dim: usize, width: f64) -> Result<Self> {
        positive("gaussian width", width)?;
        Ok(ScalarField { kind: FieldKind::Gaussian { width }, dim })
    }

    pub fn bump(dim: usize, radius: f64) -> Result<Self> {
        positive("bump radius", radius)?;
        Ok(ScalarField { kind: FieldKind::Bump { radius }, dim })
    }

    pub fn indicator(region: SetRegion) -> Self {
        let dim = region.dimension();
        ScalarField { kind: FieldKind::Indicator(region), dim }
    }

    pub fn plane_wave(frequency: Vec<f64>, width: f64) -> Result<Self> {
        positive("envelope width", width)?;
        if frequency.is_empty() || frequency.iter().any(|k| !k.is_finite()) {
            return Err(FracError::params("plane wave frequency must be a finite vector"));
        }
        let dim = frequency.len();
        Ok(ScalarField { kind: FieldKind::PlaneWave { frequency, width }, dim })
    }

    pub fn custom(dim: usize, label: impl Into<String>, support_radius: f64, eval: Arc<FieldFn>) -> Result<Self> {
        positive("support radius", support_radius)?;
        Ok(ScalarField { kind: FieldKind::Custom(CustomField { label: label.into(), eval, support_radius }), dim })
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            FieldKind::Zero => "zero",
            FieldKind::Gaussian { .. } => "gaussian",
            FieldKind::Bump { .. } => "bump",
            FieldKind::Indicator(_) => "indicator",
            FieldKind::PlaneWave { .. } => "planewave",
            FieldKind::Custom(_) => "custom",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, FieldKind::Zero)
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, FieldKind::Custom(_))
    }

    pub fn region(&self) -> Option<&SetRegion> {
        match &self.kind {
            FieldKind::Indicator(r) => Some(r),
            _ => None,
        }
    }

    pub fn has_gradient(&self) -> bool {
        matches!(
            self.kind,
            FieldKind::Zero | FieldKind::Gaussian { .. } | FieldKind::Bump { .. } | FieldKind::PlaneWave { .. }
        )
    }

    /// True when |u(c + z) - u(c + z')| structure is rotation invariant about
    /// the center, i.e. u itself is radial.
    pub fn is_radial(&self) -> bool {
        matches!(
            self.kind,
            FieldKind::Zero
                | FieldKind::Gaussian { .. }
                | FieldKind::Bump { .. }
                | FieldKind::Indicator(SetRegion::Ball { .. })
        )
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        check_dim(self.dim, x.len())?;
        Ok(self.value(x))
    }

    /// Unchecked evaluation for hot loops; `x.len()` must equal the dimension.
    #[inline]
    pub fn value(&self, x: &[f64]) -> Complex64 {
        match &self.kind {
            FieldKind::Zero => Complex64::new(0.0, 0.0),
            FieldKind::Gaussian { width } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Complex64::new((-r2 / (width * width)).exp(), 0.0)
            }
            FieldKind::Bump { radius } => Complex64::new(bump_profile(norm2(x), *radius), 0.0),
            FieldKind::Indicator(region) => Complex64::new(if region.contains(x) { 1.0 } else { 0.0 }, 0.0),
            FieldKind::PlaneWave { frequency, width } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let env = (-r2 / (width * width)).exp();
                if env == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let phase: f64 = x.iter().zip(frequency).map(|(a, k)| a * k).sum();
                Complex64::from_polar(env, phase)
            }
            FieldKind::Custom(c) => (c.eval)(x),
        }
    }

    /// ∇u at x (complex components).
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        check_dim(self.dim, x.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.gradient_into(x, &mut out)?;
        Ok(out)
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [Complex64]) -> Result<()> {
        match &self.kind {
            FieldKind::Zero => out.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0)),
            FieldKind::Gaussian { width } => {
                let u = self.value(x).re;
                let c = -2.0 / (width * width) * u;
                for (g, xi) in out.iter_mut().zip(x) {
                    *g = Complex64::new(c * xi, 0.0);
                }
            }
            FieldKind::Bump { radius } => {
                let r2 = norm2(x);
                let rr = radius * radius;
                let c = if r2 < rr {
                    let u = bump_profile(r2, *radius);
                    -2.0 * rr * u / ((rr - r2) * (rr - r2))
                } else {
                    0.0
                };
                for (g, xi) in out.iter_mut().zip(x) {
                    *g = Complex64::new(c * xi, 0.0);
                }
            }
            FieldKind::PlaneWave { frequency, width } => {
                let u = self.value(x);
                let c = -2.0 / (width * width);
                for ((g, xi), k) in out.iter_mut().zip(x).zip(frequency) {
                    *g = u * Complex64::new(c * xi, *k);
                }
            }
            FieldKind::Indicator(_) | FieldKind::Custom(_) => {
                return Err(FracError::GradientUnavailable(self.label().to_string()))
            }
        }
        Ok(())
    }

    pub fn center(&self) -> Vec<f64> {
        match &self.kind {
            FieldKind::Indicator(r) => r.center(),
            _ => vec![0.0; self.dim],
        }
    }

    /// Characteristic length (width, radius, or region size).
    pub fn length_scale(&self) -> f64 {
        match &self.kind {
            FieldKind::Zero => 1.0,
            FieldKind::Gaussian { width } | FieldKind::PlaneWave { width, .. } => *width,
            FieldKind::Bump { radius } => *radius,
            FieldKind::Indicator(r) => r.circumradius(),
            FieldKind::Custom(c) => 0.5 * c.support_radius,
        }
    }

    /// Radius about `center()` outside which |u| ≤ tol.
    pub fn support_radius(&self, tol: f64) -> f64 {
        let tol = tol.clamp(1e-300, 0.5);
        match &self.kind {
            FieldKind::Zero => 1.0,
            FieldKind::Gaussian { width } | FieldKind::PlaneWave { width, .. } => width * (1.0 / tol).ln().sqrt(),
            FieldKind::Bump { radius } => *radius,
            FieldKind::Indicator(r) => r.circumradius(),
            FieldKind::Custom(c) => c.support_radius,
        }
    }

    /// Support radius at which |u|^p drops below 1e-18 relative.
    pub fn integration_radius(&self, p: f64) -> f64 {
        self.support_radius(1e-18_f64.powf(1.0 / p))
    }

    /// Global Lipschitz constant, when finite.
    pub fn lipschitz(&self) -> Option<f64> {
        match &self.kind {
            FieldKind::Zero => Some(0.0),
            FieldKind::Gaussian { width } => Some(gaussian_lipschitz(*width)),
            FieldKind::Bump { radius } => Some(bump_lipschitz(*radius)),
            FieldKind::PlaneWave { frequency, width } => {
                let k = frequency.iter().map(|v| v * v).sum::<f64>().sqrt();
                Some(k + gaussian_lipschitz(*width))
            }
            FieldKind::Indicator(_) | FieldKind::Custom(_) => None,
        }
    }

    /// sup |u|.
    pub fn sup_modulus(&self) -> f64 {
        match &self.kind {
            FieldKind::Zero => 0.0,
            FieldKind::Custom(c) => {
                // coarse sampling bound for host fields
                let mut m: f64 = 0.0;
                let r = c.support_radius;
                let steps = 64usize;
                if self.dim == 1 {
                    for i in 0..=steps {
                        let x = -r + 2.0 * r * i as f64 / steps as f64;
                        m = m.max((c.eval)(&[x]).norm());
                    }
                } else {
                    m = m.max((c.eval)(&vec![0.0; self.dim]).norm());
                }
                m.max(1.0)
            }
            _ => 1.0,
        }
    }

    /// Closed-form ‖u‖_p^p where the catalog knows one.
    pub fn closed_lp_norm(&self, p: f64) -> Option<f64> {
        let n = self.dim as f64;
        match &self.kind {
            FieldKind::Zero => Some(0.0),
            FieldKind::Gaussian { width } | FieldKind::PlaneWave { width, .. } => {
                Some((std::f64::consts::PI * width * width / p).powf(n / 2.0))
            }
            FieldKind::Indicator(r) => Some(r.measure()),
            FieldKind::Bump { .. } | FieldKind::Custom(_) => None,
        }
    }

    /// ‖u‖_p^p: exact when a closed form exists, quadrature otherwise.
    pub fn lp_norm_p(&self, p: f64) -> Result<LpNorm> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(FracError::params(format!("p must be in [1, inf), got {p}")));
        }
        if let Some(v) = self.closed_lp_norm(p) {
            return Ok(LpNorm { value: v, error: 0.0, exact: true });
        }
        let q = self.lp_norm_quadrature(p);
        if !q.value.is_finite() {
            return Err(FracError::NonIntegrable(format!("‖u‖_{p}^{p} is not finite")));
        }
        Ok(q)
    }

    /// Quadrature value of ‖u‖_p^p with an error estimate from two resolutions.
    pub fn lp_norm_quadrature(&self, p: f64) -> LpNorm {
        let coarse = self.lp_quadrature_at(p, 1);
        let fine = self.lp_quadrature_at(p, 2);
        LpNorm { value: fine, error: (fine - coarse).abs() + 1e-13 * fine.abs(), exact: false }
    }

    fn lp_quadrature_at(&self, p: f64, level: usize) -> f64 {
        let n = self.dim;
        match &self.kind {
            FieldKind::Zero => 0.0,
            FieldKind::Indicator(SetRegion::Box { lower, upper }) => {
                // tensor rule aligned with the faces
                let rule = GaussLegendre::new(2 * level);
                lower.iter().zip(upper).map(|(l, u)| rule.integrate(*l, *u, |_| 1.0)).product()
            }
            FieldKind::Custom(c) => self.tensor_quadrature(p, c.support_radius, 6 * level),
            _ => {
                // |u| is radial about the center for every other catalog kind
                let rho = self.integration_radius(p);
                let center = self.center();
                let rule = GaussLegendre::new(10 + 6 * level);
                let breaks = if matches!(self.kind, FieldKind::Bump { .. }) {
                    // the bump is flat to all orders at its edge
                    uniform_breaks(0.0, rho, 4 * level)
                } else {
                    graded_breaks_left(0.0, rho, 0.5, 0, 4 * level)
                };
                let mut x = center.clone();
                let radial: f64 = composite(&rule, &breaks)
                    .into_iter()
                    .map(|(t, w)| {
                        x[0] = center[0] + t;
                        w * t.powi(n as i32 - 1) * self.value(&x).norm().powf(p)
                    })
                    .sum();
                sphere_area(n) * radial
            }
        }
    }

    fn tensor_quadrature(&self, p: f64, rho: f64, panels: usize) -> f64 {
        let n = self.dim;
        let rule = GaussLegendre::new(8);
        let nodes = composite(&rule, &uniform_breaks(-rho, rho, panels));
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        let mut total = 0.0;
        loop {
            let mut w = 1.0;
            for k in 0..n {
                x[k] = nodes[idx[k]].0;
                w *= nodes[idx[k]].1;
            }
            total += w * self.value(&x).norm().powf(p);
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < nodes.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == n {
                    return total;
                }
            }
        }
    }

    /// Smallest radius about `center()` holding a `fraction` of ‖u‖_p^p.
    pub fn mass_radius(&self, p: f64, fraction: f64) -> f64 {
        match &self.kind {
            FieldKind::Zero => 1.0,
            FieldKind::Indicator(r) => r.circumradius(),
            FieldKind::Custom(c) => c.support_radius,
            _ => {
                let n = self.dim;
                let rho = self.integration_radius(p);
                let center = self.center();
                let rule = GaussLegendre::new(20);
                let mut x = center.clone();
                let mut radial = |t: f64| {
                    x[0] = center[0] + t;
                    t.powi(n as i32 - 1) * self.value(&x).norm().powf(p)
                };
                let nodes = composite(&rule, &uniform_breaks(0.0, rho, 32));
                let total: f64 = nodes.iter().map(|(t, w)| w * radial(*t)).sum();
                let mut lo = 0.0;
                let mut hi = rho;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let part: f64 =
                        composite(&rule, &uniform_breaks(0.0, mid, 32)).iter().map(|(t, w)| w * radial(*t)).sum();
                    if part >= fraction * total {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        }
    }

    /// The field |u| as a catalog entry.
    pub fn modulus(&self) -> ScalarField {
        match &self.kind {
            FieldKind::PlaneWave { width, .. } => {
                ScalarField { kind: FieldKind::Gaussian { width: *width }, dim: self.dim }
            }
            FieldKind::Custom(c) => {
                let inner = c.eval.clone();
                ScalarField {
                    kind: FieldKind::Custom(CustomField {
                        label: format!("|{}|", c.label),
                        eval: Arc::new(move |x| Complex64::new(inner(x).norm(), 0.0)),
                        support_radius: c.support_radius,
                    }),
                    dim: self.dim,
                }
            }
            _ => self.clone(),
        }
    }

    /// Volume of the ball of radius `r` in this dimension.
    pub fn ball_volume(&self, r: f64) -> f64 {
        unit_ball_volume(self.dim) * r.powi(self.dim as i32)
    }
}

#[inline]
fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[inline]
fn bump_profile(r2: f64, radius: f64) -> f64 {
    let rr = radius * radius;
    if r2 >= rr {
        0.0
    } else {
        (1.0 - rr / (rr - r2)).exp()
    }
}

fn gaussian_lipschitz(width: f64) -> f64 {
    // max_t 2t/w² e^{-t²/w²} at t = w/√2
    std::f64::consts::SQRT_2 * (-0.5_f64).exp() / width
}

fn bump_lipschitz(radius: f64) -> f64 {
    // |d/dt| of the profile is 2r²t u/(r²-t²)²; maximise on a fine grid and
    // polish by golden section.
    let rr = radius * radius;
    let slope = |t: f64| {
        if t >= radius {
            return 0.0;
        }
        let d = rr - t * t;
        2.0 * rr * t * (1.0 - rr / d).exp() / (d * d)
    };
    let steps = 2000;
    let (mut best_t, mut best) = (0.0, 0.0);
    for i in 1..steps {
        let t = radius * i as f64 / steps as f64;
        let v = slope(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let h = radius / steps as f64;
    let (mut a, mut b) = ((best_t - h).max(0.0), (best_t + h).min(radius));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if slope(c) > slope(d) {
            b = d;
        } else {
            a = c;
        }
    }
    slope(0.5 * (a + b)) * (1.0 + 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn evaluation_examples() {
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        assert_eq!(g.eval(&[0.0]).unwrap(), Complex64::new(1.0, 0.0));
        assert_relative_eq!(g.eval(&[1.0]).unwrap().re, (-1.0f64).exp(), max_relative = 1e-15);
        let ind = ScalarField::indicator(SetRegion::unit_ball(2));
        assert_eq!(ind.eval(&[2.0, 0.0]).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(ind.eval(&[0.2, 0.1]).unwrap(), Complex64::new(1.0, 0.0));
        assert!(matches!(g.eval(&[0.0, 1.0]), Err(FracError::DimensionMismatch { expected: 1, got: 2 })));
    }

    #[test]
    fn bump_peaks_at_one() {
        let b = ScalarField::bump(2, 1.5).unwrap();
        assert_relative_eq!(b.eval(&[0.0, 0.0]).unwrap().re, 1.0);
        assert_eq!(b.eval(&[1.5, 0.0]).unwrap().re, 0.0);
        assert_eq!(b.eval(&[3.0, 0.0]).unwrap().re, 0.0);
    }

    #[test]
    fn lp_norm_examples() {
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        assert_relative_eq!(g.lp_norm_p(2.0).unwrap().value, (PI / 2.0).sqrt(), max_relative = 1e-14);
        let g2 = ScalarField::gaussian(2, 1.0).unwrap();
        assert_relative_eq!(g2.lp_norm_p(1.0).unwrap().value, PI, max_relative = 1e-14);
        let ind = ScalarField::indicator(SetRegion::unit_ball(2));
        assert_relative_eq!(ind.lp_norm_p(1.0).unwrap().value, PI, max_relative = 1e-14);
    }

    #[test]
    fn quadrature_agrees_with_closed_forms() {
        for n in 1..=3 {
            for p in [1.0, 2.0] {
                let fields = vec![
                    ScalarField::gaussian(n, 1.0).unwrap(),
                    ScalarField::gaussian(n, 0.7).unwrap(),
                    ScalarField::plane_wave(vec![1.0; n], 1.3).unwrap(),
                    ScalarField::indicator(SetRegion::unit_ball(n)),
                    ScalarField::indicator(SetRegion::cube(vec![-0.5; n], vec![0.25; n]).unwrap()),
                ];
                for f in fields {
                    let exact = f.closed_lp_norm(p).unwrap();
                    let q = f.lp_norm_quadrature(p);
                    assert!(
                        (q.value - exact).abs() <= q.error,
                        "{} n={n} p={p}: quad {} exact {exact} err {}",
                        f.label(),
                        q.value,
                        q.error
                    );
                }
            }
        }
    }

    #[test]
    fn bump_norm_uses_quadrature() {
        let b = ScalarField::bump(1, 1.0).unwrap();
        let q = b.lp_norm_p(1.0).unwrap();
        assert!(!q.exact);
        // independent midpoint-rule reference
        let m = 200_000;
        let h = 2.0 / m as f64;
        let reference: f64 = (0..m).map(|i| b.value(&[-1.0 + (i as f64 + 0.5) * h]).re * h).sum();
        assert_relative_eq!(q.value, reference, max_relative = 1e-8);
    }

    #[test]
    fn gradients_match_central_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let fields = vec![
            ScalarField::gaussian(2, 1.0).unwrap(),
            ScalarField::bump(2, 1.0).unwrap(),
            ScalarField::plane_wave(vec![1.0, -0.5], 1.0).unwrap(),
        ];
        let h = 1e-5;
        for f in &fields {
            for _ in 0..100 {
                let x: Vec<f64> = (0..2).map(|_| rng.random_range(-0.9..0.9)).collect();
                let g = f.gradient(&x).unwrap();
                for k in 0..2 {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += h;
                    xm[k] -= h;
                    let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
                    let scale = g[k].norm().max(1e-3);
                    assert!((fd - g[k]).norm() / scale <= 1e-6, "{} at {x:?}", f.label());
                }
            }
        }
    }

    #[test]
    fn indicator_has_no_gradient() {
        let ind = ScalarField::indicator(SetRegion::unit_ball(1));
        assert!(!ind.has_gradient());
        assert!(matches!(ind.gradient(&[0.0]), Err(FracError::GradientUnavailable(_))));
        assert!(ind.lipschitz().is_none());
    }

    #[test]
    fn lipschitz_dominates_gradient() {
        for f in [ScalarField::gaussian(1, 1.0).unwrap(), ScalarField::bump(1, 1.0).unwrap()] {
            let l = f.lipschitz().unwrap();
            for i in 0..1000 {
                let x = -1.5 + 3.0 * i as f64 / 1000.0;
                assert!(f.gradient(&[x]).unwrap()[0].norm() <= l);
            }
        }
    }

    #[test]
    fn mass_radius_captures_fraction() {
        let g = ScalarField::gaussian(1, 1.0).unwrap();
        let r = g.mass_radius(2.0, 1.0 - 1e-8);
        // erfc(√2 r) = 1e-8  ⇒  √2 r ≈ 3.97
        assert!(r > 2.75 && r < 2.87, "{r}");
    }
}
