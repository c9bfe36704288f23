//! The acceptance matrix behind `fraclim verify`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::Profile;
use super::output::scan_csv;
use crate::analysis::{diamagnetic_audit, perimeter_limit_scan, ConstantVerdict};
use crate::asym::{
    bbm_constant, cns_normalization, extrapolate, gaussian_reference_energy, magnetic_gradient_energy, ms_constant,
    scan, Endpoint,
};
use crate::error::{FracError, Result};
use crate::model::{LimitModel, NormFlavor, Params, ScalarField, SetRegion, VectorPotential};
use crate::quad::{energy_det, energy_mc, energy_split, tail_bound, EngineSpec};
use crate::special::{beta, gamma, sphere_area};

pub const MS_GRID: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.025];
pub const BBM_GRID: [f64; 4] = [0.6, 0.8, 0.9, 0.95];

/// Deliberate corruption used to confirm that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// ms_constant is scaled by 1.1.
    MsConstant,
    /// bbm_constant is scaled by 1.1.
    BbmConstant,
}

impl FromStr for Fault {
    type Err = FracError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ms-constant" => Ok(Fault::MsConstant),
            "bbm-constant" => Ok(Fault::BbmConstant),
            other => Err(FracError::Config(format!("unknown fault `{other}` (ms-constant, bbm-constant)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub target: f64,
    /// Tolerance in the unit stated by `detail` (relative unless noted).
    pub tolerance: f64,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: measured={:.8} target={:.8} tol={:e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.target,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub profile: Profile,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

struct Ctx {
    profile: Profile,
    fault: Option<Fault>,
}

impl Ctx {
    fn ms(&self, n: usize, p: f64) -> f64 {
        ms_constant(n, p) * if self.fault == Some(Fault::MsConstant) { 1.1 } else { 1.0 }
    }

    fn bbm(&self, p: f64, n: usize) -> f64 {
        bbm_constant(p, n) * if self.fault == Some(Fault::BbmConstant) { 1.1 } else { 1.0 }
    }

    fn full(&self) -> bool {
        self.profile == Profile::Full
    }
}

fn relative(measured: f64, target: f64) -> f64 {
    (measured - target).abs() / target.abs()
}

fn rel_check(id: u8, name: &str, measured: f64, target: f64, tol: f64, extra: &str) -> CheckResult {
    let err = relative(measured, target);
    CheckResult {
        id,
        name: name.into(),
        passed: err <= tol,
        measured,
        target,
        tolerance: tol,
        detail: format!("relative error {err:.2e}{extra}"),
    }
}

fn failed(id: u8, name: &str, e: FracError) -> CheckResult {
    CheckResult {
        id,
        name: name.into(),
        passed: false,
        measured: f64::NAN,
        target: f64::NAN,
        tolerance: f64::NAN,
        detail: format!("error: {e}"),
    }
}

pub const CHECK_NAMES: [&str; 10] = [
    "ms-limit-gaussian",
    "ms-limit-magnetism-blind",
    "bbm-limit",
    "fourier-oracle",
    "normalization-asymptotics",
    "diamagnetic-audit",
    "split-identity",
    "perimeter-limit",
    "tail-bound",
    "reproducibility",
];

/// Runs criterion `id` (1-based).
pub fn run_check(id: u8, profile: Profile, fault: Option<Fault>) -> CheckResult {
    let ctx = Ctx { profile, fault };
    let name = CHECK_NAMES[(id - 1) as usize];
    let out = match id {
        1 => ms_limit_gaussian(&ctx),
        2 => ms_limit_magnetic(&ctx),
        3 => bbm_limit(&ctx),
        4 => fourier_oracle(),
        5 => normalization(),
        6 => audit(&ctx),
        7 => split_identity(&ctx),
        8 => perimeter(),
        9 => tail(),
        10 => reproducibility(),
        _ => Err(FracError::Config(format!("no check {id}"))),
    };
    out.unwrap_or_else(|e| failed(id, name, e))
}

pub fn run_verify(profile: Profile, fault: Option<Fault>, mut report: impl FnMut(&CheckResult)) -> VerifySummary {
    let checks: Vec<CheckResult> = (1..=10)
        .map(|id| {
            let r = run_check(id, profile, fault);
            report(&r);
            r
        })
        .collect();
    VerifySummary { profile, passed: checks.iter().all(|c| c.passed), checks }
}

fn ms_target(ctx: &Ctx) -> Result<f64> {
    let g = ScalarField::gaussian(1, 1.0)?;
    Ok(ctx.ms(1, 2.0) * g.lp_norm_p(2.0)?.value)
}

fn ms_limit_gaussian(ctx: &Ctx) -> Result<CheckResult> {
    let g = ScalarField::gaussian(1, 1.0)?;
    let base = Params::new(1, 2.0, 0.5)?;
    let rows = scan(&g, &VectorPotential::zero(1), &base, &MS_GRID, &EngineSpec::det())?;
    let fit = extrapolate(&rows, Endpoint::Zero, LimitModel::Richardson)?;
    Ok(rel_check(1, CHECK_NAMES[0], fit.limit, ms_target(ctx)?, 0.02, ", det engine"))
}

fn ms_limit_magnetic(ctx: &Ctx) -> Result<CheckResult> {
    let g = ScalarField::gaussian(1, 1.0)?;
    let base = Params::new(1, 2.0, 0.5)?;
    let budget = if ctx.full() { 4_000_000 } else { 1_000_000 };
    let a = VectorPotential::oscillatory(1, 1.0, 1.0)?;
    let rows = scan(&g, &a, &base, &MS_GRID, &EngineSpec::mc(budget, 2024))?;
    let fit = extrapolate(&rows, Endpoint::Zero, LimitModel::Richardson)?;
    let extra = format!(", mc budget {budget}, limit ± {:.1e}", fit.limit_error);
    Ok(rel_check(2, CHECK_NAMES[1], fit.limit, ms_target(ctx)?, 0.03, &extra))
}

fn bbm_limit(ctx: &Ctx) -> Result<CheckResult> {
    let g = ScalarField::gaussian(1, 1.0)?;
    let a = VectorPotential::constant(vec![1.0])?;
    let base = Params::new(1, 2.0, 0.5)?;
    let rows = scan(&g, &a, &base, &BBM_GRID, &EngineSpec::det())?;
    let fit = extrapolate(&rows, Endpoint::One, LimitModel::Richardson)?;
    let grad = magnetic_gradient_energy(&g, &a, 2.0, NormFlavor::Euclid)?;
    Ok(rel_check(3, CHECK_NAMES[2], fit.limit, ctx.bbm(2.0, 1) * grad.value, 0.05, ", det engine"))
}

fn fourier_oracle() -> Result<CheckResult> {
    let mut worst = (0.0, 0.0, 0.0);
    for n in [1, 2] {
        let g = ScalarField::gaussian(n, 1.0)?;
        for s in [0.25, 0.5, 0.75] {
            let params = Params::new(n, 2.0, s)?;
            let e = energy_det(&g, &VectorPotential::zero(n), &params, &EngineSpec::det())?;
            let r = gaussian_reference_energy(n, s)?;
            if relative(e.value, r) >= relative(worst.0, worst.1) || worst.1 == 0.0 {
                worst = (e.value, r, s + n as f64 * 10.0);
            }
        }
    }
    let (n, s) = ((worst.2 / 10.0).floor(), worst.2 % 10.0);
    Ok(rel_check(4, CHECK_NAMES[3], worst.0, worst.1, 0.01, &format!(", worst case n={n} s={s:.2}")))
}

fn normalization() -> Result<CheckResult> {
    let mut worst_ratio = 0.0_f64;
    let mut at = (0, 0.0, "");
    for n in 1..=3 {
        let h = n as f64 / 2.0;
        let pi_h = std::f64::consts::PI.powf(h);
        for sigma in [1e-2, 1e-3, 1e-4] {
            let low = cns_normalization(n, sigma)? / sigma;
            let high = cns_normalization(n, 1.0 - sigma)? / sigma;
            for (value, target, end) in
                [(low, gamma(h) / pi_h, "s->0"), (high, 2.0 * n as f64 * gamma(h) / pi_h, "s->1")]
            {
                let ratio = relative(value, target) / (10.0 * sigma);
                if ratio > worst_ratio {
                    worst_ratio = ratio;
                    at = (n, sigma, end);
                }
            }
        }
    }
    Ok(CheckResult {
        id: 5,
        name: CHECK_NAMES[4].into(),
        passed: worst_ratio <= 1.0,
        measured: worst_ratio,
        target: 1.0,
        tolerance: 1.0,
        detail: format!("max of relative error / (10σ), attained at n={} σ={:e} {}", at.0, at.1, at.2),
    })
}

/// Every catalog field paired with every catalog potential, n ∈ {1, 2}.
pub fn audit_catalog() -> Result<Vec<(String, ScalarField, VectorPotential)>> {
    let mut out = Vec::new();
    for n in [1usize, 2] {
        let fields = vec![
            ("gaussian:w=1", ScalarField::gaussian(n, 1.0)?),
            ("bump:r=1", ScalarField::bump(n, 1.0)?),
            ("planewave", ScalarField::plane_wave(vec![2.0; n], 1.0)?),
            ("indicator:ball:r=1", ScalarField::indicator(SetRegion::unit_ball(n))),
            ("indicator:box", ScalarField::indicator(SetRegion::cube(vec![-0.5; n], vec![1.0; n])?)),
        ];
        let mut potentials = vec![
            ("zero", VectorPotential::zero(n)),
            ("constant", VectorPotential::constant(vec![1.0; n])?),
            ("oscillatory", VectorPotential::oscillatory(n, 1.0, 1.0)?),
        ];
        if n >= 2 {
            potentials.push(("rotational", VectorPotential::rotational(n, 2.0)?));
        }
        for (fname, f) in &fields {
            for (pname, a) in &potentials {
                out.push((format!("n={n} {fname} {pname}"), f.clone(), a.clone()));
            }
        }
    }
    Ok(out)
}

fn audit(ctx: &Ctx) -> Result<CheckResult> {
    let samples = if ctx.full() { 1_000_000 } else { 200_000 };
    let mut violations = 0u64;
    let mut worst = f64::INFINITY;
    let catalog = audit_catalog()?;
    for (_, f, a) in &catalog {
        let r = diamagnetic_audit(f, a, f.dimension(), samples, 11)?;
        violations += r.violations;
        worst = worst.min(r.worst_margin);
    }
    Ok(CheckResult {
        id: 6,
        name: CHECK_NAMES[5].into(),
        passed: violations == 0,
        measured: violations as f64,
        target: 0.0,
        tolerance: 0.0,
        detail: format!("{} combinations × {samples} pairs, worst margin {worst:.3e}", catalog.len()),
    })
}

/// (field, potential, p, s) cases for the split identity.
pub fn split_golden_matrix() -> Result<Vec<(String, ScalarField, VectorPotential, Params)>> {
    Ok(vec![
        (
            "gaussian n=1 zero".into(),
            ScalarField::gaussian(1, 1.0)?,
            VectorPotential::zero(1),
            Params::new(1, 2.0, 0.5)?,
        ),
        (
            "gaussian n=2 rotational".into(),
            ScalarField::gaussian(2, 1.0)?,
            VectorPotential::rotational(2, 1.0)?,
            Params::new(2, 2.0, 0.5)?,
        ),
        (
            "bump n=2 oscillatory".into(),
            ScalarField::bump(2, 1.0)?,
            VectorPotential::oscillatory(2, 1.0, 1.0)?,
            Params::new(2, 2.0, 0.3)?,
        ),
        (
            "disk n=2 constant p=1".into(),
            ScalarField::indicator(SetRegion::unit_ball(2)),
            VectorPotential::constant(vec![1.0, 0.0])?,
            Params::new(2, 1.0, 0.5)?,
        ),
    ])
}

fn split_identity(ctx: &Ctx) -> Result<CheckResult> {
    let budget = if ctx.full() { 1_000_000 } else { 200_000 };
    let mut worst = (0.0, 0.0, String::new());
    for (label, f, a, params) in split_golden_matrix()? {
        let split = energy_split(&f, &a, &params, &EngineSpec::split(budget, 31))?;
        let whole = energy_mc(&f, &a, &params, &EngineSpec::mc(budget, 32))?;
        let combined = split.total.stat_error.hypot(whole.stat_error) + split.total.trunc_error + whole.trunc_error;
        let z = (split.total.value - whole.value).abs() / combined;
        if z >= worst.0 {
            worst = (z, combined, label);
        }
    }
    Ok(CheckResult {
        id: 7,
        name: CHECK_NAMES[6].into(),
        passed: worst.0 <= 3.0,
        measured: worst.0,
        target: 0.0,
        tolerance: 3.0,
        detail: format!("|2(mid_shell+far) − total| in combined errors, worst case {}", worst.2),
    })
}

fn perimeter() -> Result<CheckResult> {
    // independent small-s limits of s·P_s from the chord formulas:
    // interval of length ℓ: s·P_s = 2ℓ^{1−s}/(1−s); disk of radius R: 2π·2^{1−s}R^{2−s}B(½, (3−s)/2)/(1−s)
    let cases = [
        (SetRegion::cube(vec![-0.5], vec![0.5])?, 2.0),
        (SetRegion::unit_ball(2), 2.0 * std::f64::consts::PI * 2.0 * beta(0.5, 1.5)),
    ];
    let mut worst = (0.0, 0.0, 0.0);
    let mut notes = Vec::new();
    for (region, oracle) in cases {
        let n = region.dimension();
        let rep = perimeter_limit_scan(
            &region,
            &VectorPotential::zero(n),
            &MS_GRID,
            &EngineSpec::det(),
            LimitModel::Richardson,
        )?;
        let err = relative(rep.fit.limit, oracle);
        if err >= relative(worst.0, worst.1) || worst.1 == 0.0 {
            worst = (rep.fit.limit, oracle, err);
        }
        let agrees_displayed = rep.verdict == ConstantVerdict::Displayed;
        notes.push(format!(
            "n={n}: limit {:.6}, 2π^(n/2)/Γ(n/2)·|E| = {:.6} (gap {:.1e}), 4π^(n/2)/Γ(n/2)·|E| = {:.6} (gap {:.1e}), data {} the 4π^(n/2)/Γ(n/2) constant",
            rep.fit.limit,
            rep.implied_limit,
            rep.implied_gap,
            rep.displayed_limit,
            rep.displayed_gap,
            if agrees_displayed { "supports" } else { "contradicts" }
        ));
        debug_assert!((rep.implied_limit - sphere_area(n) * region.measure()).abs() < 1e-12);
    }
    let mut c = rel_check(8, CHECK_NAMES[7], worst.0, worst.1, 0.03, "");
    c.detail = format!("{}; {}", c.detail, notes.join("; "));
    Ok(c)
}

fn tail() -> Result<CheckResult> {
    let g = ScalarField::gaussian(1, 1.0)?;
    let a = VectorPotential::zero(1);
    let params = Params::new(1, 2.0, 0.5)?;
    let full = energy_det(&g, &a, &params, &EngineSpec::det().with_r_max(1e300))?;
    let mut worst = (0.0, 1.0, 0.0);
    for r in [5.0, 10.0, 20.0] {
        let cut = energy_det(&g, &a, &params, &EngineSpec::det().with_r_max(r))?;
        let omitted = full.value - cut.value;
        let bound = tail_bound(&g, &params, r)?;
        if omitted / bound >= worst.0 / worst.1 {
            worst = (omitted, bound, r);
        }
    }
    Ok(CheckResult {
        id: 9,
        name: CHECK_NAMES[8].into(),
        passed: worst.0 <= worst.1,
        measured: worst.0,
        target: worst.1,
        tolerance: 0.0,
        detail: format!("omitted mass ≤ tail bound, tightest at R={}", worst.2),
    })
}

fn reproducibility() -> Result<CheckResult> {
    let g = ScalarField::gaussian(1, 1.0)?;
    let a = VectorPotential::oscillatory(1, 1.0, 1.0)?;
    let base = Params::new(1, 2.0, 0.5)?;
    let engine = EngineSpec::mc(100_000, 77).with_shards(3);
    let first = scan_csv(&scan(&g, &a, &base, &[0.4, 0.2, 0.1], &engine)?);
    let second = scan_csv(&scan(&g, &a, &base, &[0.4, 0.2, 0.1], &engine)?);
    let same = first.as_bytes() == second.as_bytes();
    Ok(CheckResult {
        id: 10,
        name: CHECK_NAMES[9].into(),
        passed: same,
        measured: if same { 0.0 } else { 1.0 },
        target: 0.0,
        tolerance: 0.0,
        detail: format!("{} bytes of scan CSV compared", first.len()),
    })
}
