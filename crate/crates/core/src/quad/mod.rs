//! Evaluation of E_{s,p,A}(u) over R^n × R^n.
//!
//! Three engines share one contract: `det` (graded Gauss–Legendre, n ≤ 2),
//! `mc` (importance-sampled pairs, n ≤ 4) and `split` (the same sampler
//! stratified over the regions of [`RegionTag`]). Indicator fields and
//! perimeters go through the ray integrator, which handles the
//! discontinuity with exact radial antiderivatives.

mod bounds;
mod det;
pub(crate) mod mc;
pub(crate) mod ray;
pub(crate) mod sampler;
mod stats;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, FracError, Result};
use crate::model::{EnergyEstimate, FieldKind, Method, Params, ScalarField, VectorPotential};

pub use bounds::{inner_cutoff_error, tail_bound, CutoffBound};
pub use det::energy_det;
pub use mc::{energy_mc, energy_split, sample_region_pairs};
pub use ray::RayParts;

/// Smallest Monte Carlo budget for which an estimate is reported.
pub const MIN_BUDGET: u64 = 10_000;

/// Engine configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineSpec {
    pub method: Method,
    pub budget: u64,
    pub seed: u64,
    pub shards: usize,
    pub det_levels: usize,
    /// Relative change between successive deterministic levels accepted as
    /// convergence.
    pub tolerance: f64,
    pub r_min: f64,
    /// Outer truncation radius; `None` picks one from the tail bound.
    pub r_max: Option<f64>,
}

impl Default for EngineSpec {
    fn default() -> Self {
        EngineSpec {
            method: Method::Mc,
            budget: 1_000_000,
            seed: 0,
            shards: 4,
            det_levels: 12,
            tolerance: 1e-4,
            r_min: 1e-6,
            r_max: None,
        }
    }
}

impl EngineSpec {
    pub fn mc(budget: u64, seed: u64) -> Self {
        EngineSpec { method: Method::Mc, budget, seed, ..Default::default() }
    }

    pub fn det() -> Self {
        EngineSpec { method: Method::Det, ..Default::default() }
    }

    pub fn split(budget: u64, seed: u64) -> Self {
        EngineSpec { method: Method::Split, budget, seed, ..Default::default() }
    }

    pub fn with_shards(mut self, shards: usize) -> Self {
        self.shards = shards;
        self
    }

    pub fn with_r_min(mut self, r_min: f64) -> Self {
        self.r_min = r_min;
        self
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = Some(r_max);
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return Err(FracError::params(format!("r_min must be positive, got {}", self.r_min)));
        }
        if let Some(r) = self.r_max {
            if !(r > self.r_min.max(1.0)) {
                return Err(FracError::params(format!("r_max must exceed max(1, r_min), got {r}")));
            }
        }
        if self.shards == 0 {
            return Err(FracError::params("shards must be >= 1"));
        }
        if self.det_levels < 2 {
            return Err(FracError::params("det_levels must be >= 2"));
        }
        if !(self.tolerance > 0.0) {
            return Err(FracError::params("tolerance must be positive"));
        }
        if self.method != Method::Det && self.budget < MIN_BUDGET {
            return Err(FracError::BudgetTooSmall { got: self.budget, min: MIN_BUDGET });
        }
        Ok(())
    }
}

/// Regions of the decomposition {|x| ≤ |y| ≤ 2|x|}, {|y| ≥ 2|x|}, {|x| ≥ |y|}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionTag {
    MidShell,
    Far,
    NearReflected,
}

impl RegionTag {
    pub const ALL: [RegionTag; 3] = [RegionTag::MidShell, RegionTag::Far, RegionTag::NearReflected];

    pub fn as_str(&self) -> &'static str {
        match self {
            RegionTag::MidShell => "mid_shell",
            RegionTag::Far => "far",
            RegionTag::NearReflected => "near_reflected",
        }
    }

    /// Region of the ordered pair (x, y); boundaries go to the first match.
    pub fn classify(x: &[f64], y: &[f64]) -> RegionTag {
        let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nx > ny {
            RegionTag::NearReflected
        } else if ny <= 2.0 * nx {
            RegionTag::MidShell
        } else {
            RegionTag::Far
        }
    }
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-region estimates and the recombined total 2·(mid_shell + far).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEstimate {
    pub regions: BTreeMap<RegionTag, EnergyEstimate>,
    pub total: EnergyEstimate,
}

impl SplitEstimate {
    pub fn region(&self, tag: RegionTag) -> &EnergyEstimate {
        &self.regions[&tag]
    }
}

/// Dispatch on `engine.method`; `split` reports its recombined total.
pub fn energy(
    field: &ScalarField,
    potential: &VectorPotential,
    params: &Params,
    engine: &EngineSpec,
) -> Result<EnergyEstimate> {
    match engine.method {
        Method::Mc => energy_mc(field, potential, params, engine),
        Method::Det => energy_det(field, potential, params, engine),
        Method::Split => Ok(energy_split(field, potential, params, engine)?.total),
    }
}

pub(crate) fn check_inputs(
    field: &ScalarField,
    potential: &VectorPotential,
    params: &Params,
    engine: &EngineSpec,
    engine_name: &'static str,
    max_dim: usize,
) -> Result<()> {
    params.validate()?;
    engine.validate()?;
    check_dim(params.n, field.dimension())?;
    check_dim(params.n, potential.dimension())?;
    if params.n > max_dim {
        return Err(FracError::UnsupportedDimension { engine: engine_name, max: max_dim, got: params.n });
    }
    if potential.is_unbounded() && field.is_custom() {
        return Err(FracError::params(
            "unbounded potentials are restricted to catalog fields with compact support or gaussian decay",
        ));
    }
    if matches!(field.kind(), FieldKind::Indicator(_)) && params.sp() >= 1.0 {
        return Err(FracError::NonIntegrable(format!(
            "indicator energy is infinite for s·p >= 1 (s·p = {})",
            params.sp()
        )));
    }
    Ok(())
}
