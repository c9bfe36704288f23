//! Ray integrator for convex indicator sets.
//!
//! For k(z) = |z|^{−n−σ} and convex E the cross term is reduced along rays:
//! writing x = b − tθ with b on the exit face,
//!   ∫_E∫_{E^c} k = 1/(σ(1−σ)) ∫_S ∫_{∂E, θ·ν>0} (θ·ν) L(b, θ)^{1−σ} dH(b) dθ,
//! with L the chord length, so the only singular factor has been integrated
//! exactly. The interaction term ∫_E∫_E |1 − e^{iφ}|^p k is taken along
//! rays in the variable w = r^{p−σ}/(p − σ), where the integrand is bounded.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mc::run_sharded;
use super::sampler::{direction, MAX_DIM};
use super::stats::Running;
use super::EngineSpec;
use crate::error::{FracError, Result};
use crate::gauss::{composite, graded_breaks_both, graded_breaks_left, uniform_breaks, GaussLegendre};
use crate::kernel::pnorm_pow;
use crate::model::{Method, NormFlavor, PotentialKind, SetRegion, VectorPotential};
use crate::special::sphere_area;

const STREAM_CROSS: u64 = 3 << 20;
const STREAM_INTERACTION: u64 = 4 << 20;

/// The two pieces of an indicator energy with kernel |x − y|^{−n−σ}.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RayParts {
    /// ∫_E∫_{E^c} k, one of the two mixed quadrants.
    pub cross: f64,
    pub cross_error: f64,
    /// ∫_E∫_E |1 − e^{iφ}|^p k.
    pub interaction: f64,
    pub interaction_error: f64,
    pub samples: u64,
    pub evaluations: u64,
    /// Deterministic refinement record of (cross, interaction), coarsest first.
    pub refinement: Vec<[f64; 2]>,
}

/// A boundary point b with an outward-facing direction θ, the quadrature
/// weight of (θ·ν)dH(b)dθ, and the chord length behind b along −θ.
struct BoundaryNode {
    b: [f64; 2],
    theta: [f64; 2],
    weight: f64,
    chord: f64,
}

struct RayProblem<'a> {
    region: &'a SetRegion,
    potential: &'a VectorPotential,
    p: f64,
    sigma: f64,
    flavor: NormFlavor,
    n: usize,
}

fn check(region: &SetRegion, potential: &VectorPotential, p: f64, sigma: f64) -> Result<()> {
    let n = region.dimension();
    if potential.dimension() != n {
        return Err(FracError::DimensionMismatch { expected: n, got: potential.dimension() });
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(FracError::NonIntegrable(format!(
            "the cross term of an indicator is finite only for 0 < σ < 1, got σ = {sigma}"
        )));
    }
    if !(p >= 1.0) {
        return Err(FracError::params(format!("p must be >= 1, got {p}")));
    }
    Ok(())
}

/// Deterministic ray integration, n ≤ 2. Levels refine until both pieces
/// change by less than `engine.tolerance`.
pub(crate) fn ray_det(
    region: &SetRegion,
    potential: &VectorPotential,
    p: f64,
    sigma: f64,
    flavor: NormFlavor,
    engine: &EngineSpec,
) -> Result<RayParts> {
    check(region, potential, p, sigma)?;
    let n = region.dimension();
    if n > 2 {
        return Err(FracError::UnsupportedDimension { engine: "det", max: 2, got: n });
    }
    let prob = RayProblem { region, potential, p, sigma, flavor, n };
    let mut out = RayParts::default();
    let mut prev: Option<(f64, f64)> = None;
    let mut change = f64::INFINITY;
    for level in 1..=engine.det_levels {
        let (cross, ce) = prob.cross_det(level);
        let (inter, ie) = if potential.is_zero() { (0.0, 0) } else { prob.interaction_det(level) };
        out.evaluations += ce + ie;
        out.refinement.push([cross, inter]);
        if let Some((pc, pi)) = prev {
            let dc = (cross - pc).abs() / cross.abs().max(f64::MIN_POSITIVE);
            let scale = (cross + inter).abs().max(f64::MIN_POSITIVE);
            let di = (inter - pi).abs() / scale;
            change = dc.max(di);
            if change <= engine.tolerance {
                out.cross = cross;
                out.interaction = inter;
                out.cross_error = (cross - pc).abs();
                out.interaction_error = (inter - pi).abs();
                return Ok(out);
            }
        }
        prev = Some((cross, inter));
    }
    Err(FracError::NonConvergent { level: engine.det_levels, change, tolerance: engine.tolerance })
}

/// Monte Carlo ray integration, n ≤ 4.
pub(crate) fn ray_mc(
    region: &SetRegion,
    potential: &VectorPotential,
    p: f64,
    sigma: f64,
    flavor: NormFlavor,
    engine: &EngineSpec,
) -> Result<RayParts> {
    check(region, potential, p, sigma)?;
    let n = region.dimension();
    if n > MAX_DIM {
        return Err(FracError::UnsupportedDimension { engine: "mc", max: MAX_DIM, got: n });
    }
    let mut engine = engine.clone();
    engine.method = Method::Mc;
    engine.validate()?;
    let prob = RayProblem { region, potential, p, sigma, flavor, n };
    let (cross_budget, inter_budget) =
        if potential.is_zero() { (engine.budget, 0) } else { (engine.budget / 2, engine.budget - engine.budget / 2) };
    let merge = |parts: Vec<Running>| {
        let mut acc = Running::default();
        parts.iter().for_each(|p| acc.merge(p));
        acc
    };
    let cross = merge(run_sharded(engine.seed, STREAM_CROSS, engine.shards, cross_budget, |rng, count| {
        let mut acc = Running::default();
        for _ in 0..count {
            acc.push(prob.cross_sample(rng));
        }
        acc
    }));
    let inter = if inter_budget > 0 {
        merge(run_sharded(engine.seed, STREAM_INTERACTION, engine.shards, inter_budget, |rng, count| {
            let mut acc = Running::default();
            for _ in 0..count {
                acc.push(prob.interaction_sample(rng));
            }
            acc
        }))
    } else {
        Running::default()
    };
    Ok(RayParts {
        cross: cross.mean,
        cross_error: cross.std_error(),
        interaction: inter.mean,
        interaction_error: inter.std_error(),
        samples: engine.budget,
        evaluations: engine.budget,
        refinement: Vec::new(),
    })
}

impl RayProblem<'_> {
    fn cross_scale(&self) -> f64 {
        1.0 / (self.sigma * (1.0 - self.sigma))
    }

    /// Chord length from the boundary point b back along −θ.
    fn chord(&self, b: &[f64], theta: &[f64]) -> f64 {
        let mut back = [0.0; MAX_DIM];
        for k in 0..self.n {
            back[k] = -theta[k];
        }
        self.region.ray_interval(b, &back[..self.n]).map(|(_, t1)| t1).unwrap_or(0.0)
    }

    fn cross_det(&self, level: usize) -> (f64, u64) {
        let e = 1.0 - self.sigma;
        let nodes = self.boundary_nodes(level, true, 10, 2);
        let total: f64 = nodes.iter().map(|nd| nd.weight * nd.chord.powf(e)).sum();
        (total * self.cross_scale(), nodes.len() as u64)
    }

    fn interaction_det(&self, level: usize) -> (f64, u64) {
        let m = level + 1;
        let nodes = self.boundary_nodes(level, false, 6, 1);
        let rule = GaussLegendre::new(6);
        let w_nodes = composite(&rule, &graded_breaks_left(0.0, 1.0, 0.25, m + 1, m));
        let parts: Vec<(f64, u64)> = nodes
            .par_iter()
            .map(|nd| {
                let (g, evals) = self.chord_interaction(nd, &rule, &w_nodes);
                (nd.weight * g, evals)
            })
            .collect();
        (parts.iter().map(|p| p.0).sum(), parts.iter().map(|p| p.1).sum())
    }

    /// Directions θ = (cos τ, sin τ) at which the integrand has a kink in τ.
    fn kink_angles(&self) -> Vec<f64> {
        use std::f64::consts::FRAC_PI_2;
        match self.potential.kind() {
            // the phase rθ·A changes sign across θ ⟂ A
            PotentialKind::Constant(a) if self.n == 2 => {
                let alpha = a[1].atan2(a[0]);
                vec![alpha - FRAC_PI_2, alpha + FRAC_PI_2]
            }
            _ => Vec::new(),
        }
    }

    /// Nodes of ∫_S∫_{∂E, θ·ν>0}(θ·ν)·g dH dθ for n ≤ 2. With `isotropic`
    /// the integrand is taken to depend on θ only through the geometry of E.
    fn boundary_nodes(&self, level: usize, isotropic: bool, order: usize, grading: usize) -> Vec<BoundaryNode> {
        let m = level + 1;
        let g = grading + m;
        let rule = GaussLegendre::new(order);
        let mut out = Vec::new();
        if self.n == 1 {
            let (lo, hi) = match self.region {
                SetRegion::Ball { center, radius } => (center[0] - radius, center[0] + radius),
                SetRegion::Box { lower, upper } => (lower[0], upper[0]),
            };
            for (b, t) in [(hi, 1.0), (lo, -1.0)] {
                out.push(BoundaryNode { b: [b, 0.0], theta: [t, 0.0], weight: 1.0, chord: hi - lo });
            }
            return out;
        }
        let kinks = if isotropic { Vec::new() } else { self.kink_angles() };
        match self.region {
            SetRegion::Ball { center, radius } => {
                use std::f64::consts::{FRAC_PI_2, PI};
                let taus: Vec<(f64, f64)> = if isotropic {
                    (0..4).map(|j| (FRAC_PI_2 * j as f64, FRAC_PI_2)).collect()
                } else {
                    let start = kinks.first().copied().unwrap_or(0.0);
                    let mut breaks: Vec<f64> = kinks.iter().map(|k| start + (k - start).rem_euclid(2.0 * PI)).collect();
                    breaks.push(start + 2.0 * PI);
                    breaks.sort_by(f64::total_cmp);
                    breaks.dedup();
                    if breaks.len() == 1 {
                        breaks.insert(0, start);
                    }
                    let mut nodes = Vec::new();
                    for w in breaks.windows(2) {
                        let panels = ((w[1] - w[0]) / (2.0 * PI) * (4 * m) as f64).ceil() as usize;
                        nodes.extend(composite(&rule, &uniform_breaks(w[0], w[1], panels)));
                    }
                    nodes
                };
                let betas = composite(&rule, &graded_breaks_both(-FRAC_PI_2, FRAC_PI_2, 0.25, g, m));
                for (tau, wt) in &taus {
                    let theta = [tau.cos(), tau.sin()];
                    for (beta, wb) in &betas {
                        let alpha = tau + beta;
                        let nu = [alpha.cos(), alpha.sin()];
                        let dot = beta.cos();
                        if dot <= 0.0 {
                            continue;
                        }
                        let b = [center[0] + radius * nu[0], center[1] + radius * nu[1]];
                        out.push(BoundaryNode { b, theta, weight: wt * wb * radius * dot, chord: 2.0 * radius * dot });
                    }
                }
            }
            SetRegion::Box { lower, upper } => {
                use std::f64::consts::FRAC_PI_2;
                for quadrant in 0..4 {
                    let a = quadrant as f64 * FRAC_PI_2;
                    // the backward chord switches faces at the corner direction
                    let diag = a + if quadrant % 2 == 0 {
                        (upper[1] - lower[1]).atan2(upper[0] - lower[0])
                    } else {
                        (upper[0] - lower[0]).atan2(upper[1] - lower[1])
                    };
                    let mut breaks = vec![a, diag, a + FRAC_PI_2];
                    for k in &kinks {
                        let k = a + (k - a).rem_euclid(2.0 * std::f64::consts::PI);
                        if k > a && k < a + FRAC_PI_2 {
                            breaks.push(k);
                        }
                    }
                    breaks.sort_by(f64::total_cmp);
                    for w in breaks.windows(2) {
                        if w[1] - w[0] < 1e-14 {
                            continue;
                        }
                        for (tau, wt) in composite(&rule, &graded_breaks_both(w[0], w[1], 0.25, g, m)) {
                            self.box_faces(lower, upper, tau, wt, &rule, g, m, &mut out);
                        }
                    }
                }
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn box_faces(
        &self,
        lower: &[f64],
        upper: &[f64],
        tau: f64,
        wt: f64,
        rule: &GaussLegendre,
        g: usize,
        m: usize,
        out: &mut Vec<BoundaryNode>,
    ) {
        let theta = [tau.cos(), tau.sin()];
        for k in 0..2 {
            if theta[k] == 0.0 {
                continue;
            }
            let j = 1 - k;
            let depth = (upper[k] - lower[k]) / theta[k].abs();
            let fixed = if theta[k] > 0.0 { upper[k] } else { lower[k] };
            let mut breaks = vec![lower[j], upper[j]];
            // the backward ray switches from the opposite face to a side face
            let kink = if theta[j] > 0.0 { lower[j] + theta[j] * depth } else { upper[j] + theta[j] * depth };
            if kink > lower[j] && kink < upper[j] {
                breaks.insert(1, kink);
            }
            for w in breaks.windows(2) {
                for (u, wu) in composite(rule, &graded_breaks_both(w[0], w[1], 0.25, g, m)) {
                    let mut b = [0.0; 2];
                    b[k] = fixed;
                    b[j] = u;
                    out.push(BoundaryNode {
                        b,
                        theta,
                        weight: wt * wu * theta[k].abs(),
                        chord: self.chord(&b, &theta),
                    });
                }
            }
        }
    }

    /// ∫_0^L r^{−1−σ} ∫_r^L h(b − tθ, θ, r) dt dr over the chord behind b,
    /// in the variable w = r^{p−σ}/(p−σ).
    fn chord_interaction(&self, nd: &BoundaryNode, rule: &GaussLegendre, w_nodes: &[(f64, f64)]) -> (f64, u64) {
        let n = self.n;
        let e = self.p - self.sigma;
        let len = nd.chord;
        if len <= 0.0 {
            return (0.0, 0);
        }
        let w_max = len.powf(e) / e;
        let theta = &nd.theta[..n];
        let mut x = [0.0; 2];
        let mut total = 0.0;
        let mut evals = 0u64;
        let phase_at = |t: f64, r: f64, x: &mut [f64; 2]| {
            let mut y = [0.0; 2];
            for k in 0..n {
                x[k] = nd.b[k] - t * theta[k];
                y[k] = x[k] + r * theta[k];
            }
            self.potential.phase(&x[..n], &y[..n])
        };
        for (v, wv) in w_nodes {
            let r = (e * v * w_max).powf(1.0 / e).min(len);
            if r <= 0.0 || r >= len {
                continue;
            }
            let mut breaks = vec![r, len];
            let (f0, f1) = (phase_at(r, r, &mut x), phase_at(len, r, &mut x));
            if f0 * f1 < 0.0 {
                // |1 − e^{iφ}| has a kink where the phase changes sign
                let (mut lo, mut hi, mut flo) = (r, len, f0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let fm = phase_at(mid, r, &mut x);
                    evals += 1;
                    if (fm < 0.0) == (flo < 0.0) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-14 * len {
                        break;
                    }
                }
                breaks.insert(1, 0.5 * (lo + hi));
            }
            let mut inner = 0.0;
            for (t, wt) in composite(rule, &breaks) {
                for k in 0..n {
                    x[k] = nd.b[k] - t * theta[k];
                }
                inner += wt * self.interaction_ratio(&x[..n], theta, r);
            }
            evals += (rule.len() * (breaks.len() - 1)) as u64;
            total += wv * w_max * inner;
        }
        (total, evals)
    }

    /// h(x, θ, r)/r^p with h = |1 − e^{iφ(x, x+rθ)}|^p.
    #[inline]
    fn interaction_ratio(&self, x: &[f64], theta: &[f64], r: f64) -> f64 {
        let mut y = [0.0; MAX_DIM];
        for k in 0..self.n {
            y[k] = x[k] + r * theta[k];
        }
        let phi = self.potential.phase(x, &y[..self.n]);
        if phi == 0.0 {
            return 0.0;
        }
        let d = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, phi);
        pnorm_pow(d, self.p, self.flavor) / r.powf(self.p)
    }

    /// Uniform point on ∂E with its outward normal.
    fn boundary_point(&self, rng: &mut ChaCha8Rng, b: &mut [f64], nu: &mut [f64]) {
        let n = self.n;
        match self.region {
            SetRegion::Ball { center, radius } => {
                direction(rng, n, nu);
                for k in 0..n {
                    b[k] = center[k] + radius * nu[k];
                }
            }
            SetRegion::Box { lower, upper } => {
                let sides: Vec<f64> = (0..n).map(|k| upper[k] - lower[k]).collect();
                let areas: Vec<f64> =
                    (0..n).map(|k| (0..n).filter(|j| *j != k).map(|j| sides[j]).product::<f64>()).collect();
                let total: f64 = areas.iter().sum();
                let mut v = rng.random::<f64>() * total;
                let mut face = n - 1;
                for (k, a) in areas.iter().enumerate() {
                    if v < *a {
                        face = k;
                        break;
                    }
                    v -= a;
                }
                let high: bool = rng.random();
                for k in 0..n {
                    nu[k] = 0.0;
                    b[k] = if k == face {
                        if high {
                            upper[k]
                        } else {
                            lower[k]
                        }
                    } else {
                        lower[k] + rng.random::<f64>() * sides[k]
                    };
                }
                nu[face] = if high { 1.0 } else { -1.0 };
            }
        }
    }

    fn cross_sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let n = self.n;
        let mut theta = [0.0; MAX_DIM];
        let mut b = [0.0; MAX_DIM];
        let mut nu = [0.0; MAX_DIM];
        direction(rng, n, &mut theta);
        self.boundary_point(rng, &mut b[..n], &mut nu[..n]);
        let dot: f64 = (0..n).map(|k| theta[k] * nu[k]).sum();
        if dot <= 0.0 {
            return 0.0;
        }
        let chord = self.chord(&b[..n], &theta[..n]);
        sphere_area(n) * self.region.boundary_measure() * dot * chord.powf(1.0 - self.sigma) * self.cross_scale()
    }

    fn interaction_sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let n = self.n;
        let mut x = [0.0; MAX_DIM];
        match self.region {
            SetRegion::Ball { center, radius } => {
                let mut d = [0.0; MAX_DIM];
                direction(rng, n, &mut d);
                let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
                for k in 0..n {
                    x[k] = center[k] + r * d[k];
                }
            }
            SetRegion::Box { lower, upper } => {
                for k in 0..n {
                    x[k] = lower[k] + rng.random::<f64>() * (upper[k] - lower[k]);
                }
            }
        }
        let mut theta = [0.0; MAX_DIM];
        direction(rng, n, &mut theta);
        let e = self.p - self.sigma;
        let rho = self.region.exit_distance(&x[..n], &theta[..n]);
        if rho <= 0.0 {
            return 0.0;
        }
        let w_max = rho.powf(e) / e;
        let w = w_max * rng.random::<f64>();
        let r = (e * w).powf(1.0 / e);
        if r <= 0.0 {
            return 0.0;
        }
        self.region.measure() * sphere_area(n) * w_max * self.interaction_ratio(&x[..n], &theta[..n], r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn interval() -> SetRegion {
        SetRegion::cube(vec![-0.5], vec![0.5]).unwrap()
    }

    #[test]
    fn interval_cross_term_closed_form() {
        // ∫_E∫_{E^c}|x−y|^{−1−σ} = 2/(σ(1−σ)) for |E| = 1
        let a = VectorPotential::zero(1);
        for sigma in [0.1, 0.5, 0.9] {
            let parts = ray_det(&interval(), &a, 1.0, sigma, NormFlavor::Euclid, &EngineSpec::det()).unwrap();
            assert_relative_eq!(parts.cross, 2.0 / (sigma * (1.0 - sigma)), max_relative = 1e-14);
            assert_eq!(parts.interaction, 0.0);
        }
    }

    #[test]
    fn disk_cross_term_matches_chord_formula() {
        // (1/(σ(1−σ)))·2π·R·∫cos β (2R cos β)^{1−σ} dβ = …·2π·2^{1−σ}R^{2−σ}B(½, (3−σ)/2)
        let disk = SetRegion::unit_ball(2);
        let a = VectorPotential::zero(2);
        let sigma = 0.5;
        let parts = ray_det(&disk, &a, 1.0, sigma, NormFlavor::Euclid, &EngineSpec::det()).unwrap();
        let exact =
            2.0 * std::f64::consts::PI * 2f64.powf(1.0 - sigma) * crate::special::beta(0.5, (3.0 - sigma) / 2.0)
                / (sigma * (1.0 - sigma));
        assert_relative_eq!(parts.cross, exact, max_relative = 1e-6);
    }

    #[test]
    fn square_agrees_between_engines() {
        let sq = SetRegion::cube(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let a = VectorPotential::constant(vec![1.0, 0.5]).unwrap();
        let det = ray_det(&sq, &a, 1.0, 0.4, NormFlavor::Euclid, &EngineSpec::det()).unwrap();
        let mc = ray_mc(&sq, &a, 1.0, 0.4, NormFlavor::Euclid, &EngineSpec::mc(400_000, 3)).unwrap();
        assert!((det.cross - mc.cross).abs() <= 4.0 * mc.cross_error + 1e-3 * det.cross);
        assert!((det.interaction - mc.interaction).abs() <= 4.0 * mc.interaction_error + 1e-3 * det.interaction);
    }

    #[test]
    fn rejects_sigma_at_least_one() {
        let a = VectorPotential::zero(1);
        assert!(ray_det(&interval(), &a, 2.0, 1.0, NormFlavor::Euclid, &EngineSpec::det()).is_err());
    }
}
