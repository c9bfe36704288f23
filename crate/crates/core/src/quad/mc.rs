//! Importance-sampled Monte Carlo and its stratified variant.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::bounds::{auto_ln_r_max, tail_bound_ln, LN_R_MAX_CAP};
use super::sampler::{Draw, PairSampler, MAX_DIM};
use super::stats::{shard_sizes, Running};
use super::{check_inputs, EngineSpec, RegionTag, SplitEstimate, MIN_BUDGET};
use crate::asym::bbm_constant;
use crate::error::{FracError, Result};
use crate::kernel::PairSample;
use crate::model::{Budget, EnergyEstimate, FieldKind, Method, Params, ScalarField, SetRegion, VectorPotential};

const STREAM_PLAIN: u64 = 0;
const STREAM_PILOT: u64 = 1 << 20;
const STREAM_REGION: u64 = 2 << 20;

/// Run `total` draws split over `shards` independent ChaCha streams derived
/// from (seed, stream_base + shard). Results come back in shard order.
pub(crate) fn run_sharded<T, F>(seed: u64, stream_base: u64, shards: usize, total: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    shard_sizes(total, shards)
        .into_par_iter()
        .enumerate()
        .map(|(k, count)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + k as u64);
            work(&mut rng, count)
        })
        .collect()
}

fn merge_all(parts: &[Running]) -> Running {
    let mut acc = Running::default();
    parts.iter().for_each(|p| acc.merge(p));
    acc
}

/// Radius below which the sampler stops and the leading-order near mass is
/// used instead; indicators get a floor because their near-field weights
/// have heavy tails.
fn effective_r_min(field: &ScalarField, r_min: f64) -> f64 {
    match field.kind() {
        FieldKind::Indicator(region) => r_min.max(1e-3 * inradius(region)),
        _ => r_min,
    }
}

pub(crate) fn inradius(region: &SetRegion) -> f64 {
    match region {
        SetRegion::Ball { radius, .. } => *radius,
        SetRegion::Box { lower, upper } => {
            lower.iter().zip(upper).map(|(l, u)| 0.5 * (u - l)).fold(f64::INFINITY, f64::min)
        }
    }
}

/// Mass of the boundary layer {|x − y| < r_min} across ∂E for an indicator:
/// Q_{1,n}·H^{n−1}(∂E)·r_min^{1−sp}/(1 − sp).
fn indicator_layer(field: &ScalarField, params: &Params, r_min: f64) -> f64 {
    match field.kind() {
        FieldKind::Indicator(region) => {
            let sp = params.sp();
            bbm_constant(1.0, params.n) * region.boundary_measure() * r_min.powf(1.0 - sp) / (1.0 - sp)
        }
        _ => 0.0,
    }
}

struct Setup {
    r_min: f64,
    ln_r_max: f64,
    trunc: f64,
    layer: f64,
}

impl Setup {
    fn new(field: &ScalarField, params: &Params, engine: &EngineSpec) -> Result<Self> {
        let r_min = effective_r_min(field, engine.r_min);
        let ln_r_max = match engine.r_max {
            Some(r) => r.ln().min(LN_R_MAX_CAP),
            None => auto_ln_r_max(field, params),
        };
        if ln_r_max <= r_min.ln() {
            return Err(FracError::params("r_max must exceed the effective r_min"));
        }
        let norm = field.lp_norm_p(params.p)?;
        let trunc = tail_bound_ln(norm.value + norm.error, params, ln_r_max);
        Ok(Setup { r_min, ln_r_max, trunc, layer: indicator_layer(field, params, r_min) })
    }
}

fn zero_estimate(method: Method, engine: &EngineSpec) -> EnergyEstimate {
    let mut e = EnergyEstimate::zero(method, Some(engine.seed));
    e.r_min = engine.r_min;
    e.r_max = engine.r_max.unwrap_or(0.0);
    e
}

/// Importance-sampled estimate of E_{s,p,A}(u) for n ≤ 4.
pub fn energy_mc(
    field: &ScalarField,
    potential: &VectorPotential,
    params: &Params,
    engine: &EngineSpec,
) -> Result<EnergyEstimate> {
    let mut engine = engine.clone();
    engine.method = Method::Mc;
    check_inputs(field, potential, params, &engine, "mc", MAX_DIM)?;
    if field.is_zero() {
        return Ok(zero_estimate(Method::Mc, &engine));
    }
    let setup = Setup::new(field, params, &engine)?;
    let sampler = PairSampler::new(field, potential, params, setup.r_min, setup.ln_r_max);
    let parts = run_sharded(engine.seed, STREAM_PLAIN, engine.shards, engine.budget, |rng, count| {
        let mut total = Running::default();
        let mut near = Running::default();
        let mut d = Draw::default();
        for _ in 0..count {
            sampler.sample(rng, &mut d);
            total.push(d.pair + d.near);
            near.push(d.near);
        }
        (total, near)
    });
    let total = merge_all(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
    let near = merge_all(&parts.iter().map(|p| p.1).collect::<Vec<_>>());
    Ok(EnergyEstimate {
        value: (total.mean + setup.layer).max(0.0),
        stat_error: total.std_error(),
        trunc_error: setup.trunc,
        method: Method::Mc,
        budget: Budget { samples: engine.budget, evaluations: 2 * engine.budget },
        seed: Some(engine.seed),
        near_correction: near.mean + setup.layer,
        r_min: setup.r_min,
        r_max: setup.ln_r_max.exp(),
        refinement: Vec::new(),
    })
}

/// Per-region contributions of one draw, indexed like [`RegionTag::ALL`].
#[inline]
fn region_values(d: &Draw, n: usize) -> [(f64, f64); 3] {
    let mut out = [(0.0, 0.0); 3];
    let tag = RegionTag::classify(&d.x[..n], &d.y[..n]);
    out[index(tag)].0 += d.pair;
    let near_tag = if d.near_outward { RegionTag::MidShell } else { RegionTag::NearReflected };
    out[index(near_tag)].0 += d.near;
    out[index(near_tag)].1 += d.near;
    out
}

fn index(tag: RegionTag) -> usize {
    match tag {
        RegionTag::MidShell => 0,
        RegionTag::Far => 1,
        RegionTag::NearReflected => 2,
    }
}

/// Stratified estimate over the three regions, with budgets from a pilot
/// run allocated in proportion to each region's standard deviation.
/// The total is 2·(mid_shell + far).
pub fn energy_split(
    field: &ScalarField,
    potential: &VectorPotential,
    params: &Params,
    engine: &EngineSpec,
) -> Result<SplitEstimate> {
    let mut engine = engine.clone();
    engine.method = Method::Split;
    check_inputs(field, potential, params, &engine, "split", MAX_DIM)?;
    let min = 4 * MIN_BUDGET;
    if engine.budget < min {
        return Err(FracError::BudgetTooSmall { got: engine.budget, min });
    }
    if field.is_zero() {
        let zero = zero_estimate(Method::Split, &engine);
        let regions = RegionTag::ALL.iter().map(|t| (*t, zero.clone())).collect();
        return Ok(SplitEstimate { regions, total: zero });
    }
    let n = params.n;
    let setup = Setup::new(field, params, &engine)?;
    let sampler = PairSampler::new(field, potential, params, setup.r_min, setup.ln_r_max);

    let pilot_budget = (engine.budget / 10).max(MIN_BUDGET);
    let pilot = run_sharded(engine.seed, STREAM_PILOT, engine.shards, pilot_budget, |rng, count| {
        let mut acc = [Running::default(); 3];
        let mut d = Draw::default();
        for _ in 0..count {
            sampler.sample(rng, &mut d);
            for (a, v) in acc.iter_mut().zip(region_values(&d, n)) {
                a.push(v.0);
            }
        }
        acc
    });
    let sigmas: Vec<f64> =
        (0..3).map(|i| merge_all(&pilot.iter().map(|p| p[i]).collect::<Vec<_>>()).std_dev()).collect();
    let budgets = allocate(engine.budget - pilot_budget, &sigmas);

    let mut regions = BTreeMap::new();
    for (i, tag) in RegionTag::ALL.iter().enumerate() {
        let parts =
            run_sharded(engine.seed, STREAM_REGION + ((i as u64) << 16), engine.shards, budgets[i], |rng, count| {
                let mut total = Running::default();
                let mut near = Running::default();
                let mut d = Draw::default();
                for _ in 0..count {
                    sampler.sample(rng, &mut d);
                    let v = region_values(&d, n)[i];
                    total.push(v.0);
                    near.push(v.1);
                }
                (total, near)
            });
        let total = merge_all(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
        let near = merge_all(&parts.iter().map(|p| p.1).collect::<Vec<_>>());
        // the boundary layer and the far tail are symmetric under x ↔ y
        let (layer, trunc) = match tag {
            RegionTag::MidShell => (0.5 * setup.layer, 0.0),
            RegionTag::Far => (0.0, 0.5 * setup.trunc),
            RegionTag::NearReflected => (0.5 * setup.layer, 0.5 * setup.trunc),
        };
        regions.insert(
            *tag,
            EnergyEstimate {
                value: total.mean + layer,
                stat_error: total.std_error(),
                trunc_error: trunc,
                method: Method::Split,
                budget: Budget { samples: budgets[i], evaluations: 2 * budgets[i] },
                seed: Some(engine.seed),
                near_correction: near.mean + layer,
                r_min: setup.r_min,
                r_max: setup.ln_r_max.exp(),
                refinement: Vec::new(),
            },
        );
    }
    let mid = &regions[&RegionTag::MidShell];
    let far = &regions[&RegionTag::Far];
    let total = EnergyEstimate {
        value: (2.0 * (mid.value + far.value)).max(0.0),
        stat_error: 2.0 * mid.stat_error.hypot(far.stat_error),
        trunc_error: setup.trunc,
        method: Method::Split,
        budget: Budget { samples: engine.budget, evaluations: 2 * engine.budget },
        seed: Some(engine.seed),
        near_correction: 2.0 * (mid.near_correction + far.near_correction),
        r_min: setup.r_min,
        r_max: setup.ln_r_max.exp(),
        refinement: Vec::new(),
    };
    Ok(SplitEstimate { regions, total })
}

/// Split `budget` with a floor of 5% per region and the rest ∝ σ.
fn allocate(budget: u64, sigmas: &[f64]) -> Vec<u64> {
    let k = sigmas.len() as u64;
    let floor = (budget / 20).max(MIN_BUDGET / 2);
    let rest = budget.saturating_sub(floor * k);
    let sum: f64 = sigmas.iter().sum();
    let mut out: Vec<u64> = sigmas
        .iter()
        .map(|s| {
            let share = if sum > 0.0 { s / sum } else { 1.0 / k as f64 };
            floor + (share * rest as f64).floor() as u64
        })
        .collect();
    let used: u64 = out.iter().sum();
    out[0] += budget.saturating_sub(used);
    out
}

/// Draw `count` pairs from the engine's sampler that fall in `tag`.
pub fn sample_region_pairs(
    field: &ScalarField,
    potential: &VectorPotential,
    params: &Params,
    engine: &EngineSpec,
    tag: RegionTag,
    count: usize,
) -> Result<Vec<PairSample>> {
    let mut engine = engine.clone();
    engine.method = Method::Mc;
    check_inputs(field, potential, params, &engine, "mc", MAX_DIM)?;
    let n = params.n;
    let setup = Setup::new(field, params, &engine)?;
    let sampler = PairSampler::new(field, potential, params, setup.r_min, setup.ln_r_max);
    let mut rng = ChaCha8Rng::seed_from_u64(engine.seed);
    let mut out = Vec::with_capacity(count);
    let mut d = Draw::default();
    let max_attempts = 1000 * count.max(1);
    for _ in 0..max_attempts {
        if out.len() == count {
            break;
        }
        sampler.sample(&mut rng, &mut d);
        if RegionTag::classify(&d.x[..n], &d.y[..n]) == tag {
            out.push(PairSample { x: d.x[..n].to_vec(), y: d.y[..n].to_vec(), weight: d.pair });
        }
    }
    Ok(out)
}
