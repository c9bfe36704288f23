//! C interface to `fraclim`.
//!
//! Every function returns a [`FraclimStatus`]; results go through out
//! pointers. Handles are opaque and owned by the caller, who releases them
//! with the matching `_free`. On failure the message of the most recent error
//! on the calling thread is available from [`fraclim_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fraclim::asym::{bbm_constant, cns_normalization, ms_constant};
use fraclim::cli::{FieldSpec, PotentialSpec};
use fraclim::quad::{energy, EngineSpec};
use fraclim::{analysis, FracError, Params, ScalarField, SetRegion, VectorPotential};

/// Status codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FraclimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotIntegrable = 4,
    BudgetTooSmall = 5,
    UnsupportedDimension = 6,
    NonConvergent = 7,
    Numerical = 8,
    Panic = 9,
}

impl From<&FracError> for FraclimStatus {
    fn from(e: &FracError) -> Self {
        match e {
            FracError::DimensionMismatch { .. } => FraclimStatus::DimensionMismatch,
            FracError::NonIntegrable(_) | FracError::UnknownNorm(_) => FraclimStatus::NotIntegrable,
            FracError::BudgetTooSmall { .. } => FraclimStatus::BudgetTooSmall,
            FracError::UnsupportedDimension { .. } => FraclimStatus::UnsupportedDimension,
            FracError::NonConvergent { .. } => FraclimStatus::NonConvergent,
            FracError::RankDeficient(_) | FracError::ZeroEnergy => FraclimStatus::Numerical,
            _ => FraclimStatus::InvalidArgument,
        }
    }
}

/// Opaque scalar field.
pub struct FraclimField(ScalarField);

/// Opaque vector potential.
pub struct FraclimPotential(VectorPotential);

/// Opaque engine configuration.
pub struct FraclimEngine(EngineSpec);

/// Energy estimate with its error budget.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FraclimEstimate {
    pub value: f64,
    /// One standard error; zero for the deterministic engine.
    pub stat_error: f64,
    /// Bound on the far-field mass omitted beyond `r_max`.
    pub trunc_error: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub samples: u64,
    pub evaluations: u64,
}

impl From<&fraclim::EnergyEstimate> for FraclimEstimate {
    fn from(e: &fraclim::EnergyEstimate) -> Self {
        FraclimEstimate {
            value: e.value,
            stat_error: e.stat_error,
            trunc_error: e.trunc_error,
            r_min: e.r_min,
            r_max: e.r_max,
            samples: e.budget.samples,
            evaluations: e.budget.evaluations,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let text = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

/// Runs `body`, mapping errors and panics to status codes.
fn guard(body: impl FnOnce() -> Result<(), FraclimStatusError>) -> FraclimStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FraclimStatus::Ok,
        Ok(Err(FraclimStatusError(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            FraclimStatus::Panic
        }
    }
}

struct FraclimStatusError(FraclimStatus, String);

impl From<FracError> for FraclimStatusError {
    fn from(e: FracError) -> Self {
        FraclimStatusError((&e).into(), e.to_string())
    }
}

fn null(what: &str) -> FraclimStatusError {
    FraclimStatusError(FraclimStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, FraclimStatusError> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], FraclimStatusError> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, FraclimStatusError> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| FraclimStatusError(FraclimStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), FraclimStatusError> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fraclim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fraclim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a field spec such as `gaussian:w=1` or `indicator:ball:r=1` in
/// dimension `n`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_field_parse(
    spec: *const c_char,
    n: usize,
    out: *mut *mut FraclimField,
) -> FraclimStatus {
    guard(|| {
        let parsed: FieldSpec = text(spec, "spec")?.parse()?;
        let field = parsed.build(n)?;
        write(out, boxed(FraclimField(field)), "out")
    })
}

/// Gaussian e^{−|x|²/w²} in dimension `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_field_gaussian(n: usize, width: f64, out: *mut *mut FraclimField) -> FraclimStatus {
    guard(|| write(out, boxed(FraclimField(ScalarField::gaussian(n, width)?)), "out"))
}

/// Indicator of the ball of `radius` about `center[0..n]`.
///
/// # Safety
/// `center` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_field_indicator_ball(
    n: usize,
    center: *const f64,
    radius: f64,
    out: *mut *mut FraclimField,
) -> FraclimStatus {
    guard(|| {
        let region = SetRegion::ball(slice(center, n, "center")?.to_vec(), radius)?;
        write(out, boxed(FraclimField(ScalarField::indicator(region))), "out")
    })
}

/// Indicator of the box with corners `lower[0..n]` and `upper[0..n]`.
///
/// # Safety
/// `lower` and `upper` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_field_indicator_box(
    n: usize,
    lower: *const f64,
    upper: *const f64,
    out: *mut *mut FraclimField,
) -> FraclimStatus {
    guard(|| {
        let region = SetRegion::cube(slice(lower, n, "lower")?.to_vec(), slice(upper, n, "upper")?.to_vec())?;
        write(out, boxed(FraclimField(ScalarField::indicator(region))), "out")
    })
}

/// Releases a field; null is ignored.
///
/// # Safety
/// `field` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fraclim_field_free(field: *mut FraclimField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Parses a potential spec such as `potential:rotational:b=2`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_potential_parse(
    spec: *const c_char,
    n: usize,
    out: *mut *mut FraclimPotential,
) -> FraclimStatus {
    guard(|| {
        let parsed: PotentialSpec = text(spec, "spec")?.parse()?;
        write(out, boxed(FraclimPotential(parsed.build(n)?)), "out")
    })
}

/// A ≡ 0 in dimension `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_potential_zero(n: usize, out: *mut *mut FraclimPotential) -> FraclimStatus {
    guard(|| {
        if n == 0 {
            return Err(FraclimStatusError(FraclimStatus::InvalidArgument, "n must be >= 1".into()));
        }
        write(out, boxed(FraclimPotential(VectorPotential::zero(n))), "out")
    })
}

/// Constant potential `a[0..n]`.
///
/// # Safety
/// `a` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_potential_constant(
    n: usize,
    a: *const f64,
    out: *mut *mut FraclimPotential,
) -> FraclimStatus {
    guard(|| write(out, boxed(FraclimPotential(VectorPotential::constant(slice(a, n, "a")?.to_vec())?)), "out"))
}

/// Releases a potential; null is ignored.
///
/// # Safety
/// `potential` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fraclim_potential_free(potential: *mut FraclimPotential) {
    if !potential.is_null() {
        drop(Box::from_raw(potential));
    }
}

/// Deterministic engine with default cutoffs.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_engine_det(out: *mut *mut FraclimEngine) -> FraclimStatus {
    guard(|| write(out, boxed(FraclimEngine(EngineSpec::det())), "out"))
}

/// Monte Carlo engine; results depend only on (`budget`, `seed`, `shards`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_engine_mc(
    budget: u64,
    seed: u64,
    shards: usize,
    out: *mut *mut FraclimEngine,
) -> FraclimStatus {
    guard(|| {
        let engine = EngineSpec::mc(budget, seed).with_shards(shards);
        engine.validate()?;
        write(out, boxed(FraclimEngine(engine)), "out")
    })
}

/// Sets the outer truncation radius.
///
/// # Safety
/// `engine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fraclim_engine_set_r_max(engine: *mut FraclimEngine, r_max: f64) -> FraclimStatus {
    guard(|| {
        let e = engine.as_mut().ok_or_else(|| null("engine"))?;
        let updated = e.0.clone().with_r_max(r_max);
        updated.validate()?;
        e.0 = updated;
        Ok(())
    })
}

/// Releases an engine; null is ignored.
///
/// # Safety
/// `engine` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fraclim_engine_free(engine: *mut FraclimEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Magnetic Gagliardo energy of `field` under `potential` at (p, s).
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_energy(
    field: *const FraclimField,
    potential: *const FraclimPotential,
    p: f64,
    s: f64,
    engine: *const FraclimEngine,
    out: *mut FraclimEstimate,
) -> FraclimStatus {
    guard(|| {
        let f = &borrow(field, "field")?.0;
        let a = &borrow(potential, "potential")?.0;
        let e = &borrow(engine, "engine")?.0;
        let params = Params::new(f.dimension(), p, s)?;
        let est = energy(f, a, &params, e)?;
        write(out, FraclimEstimate::from(&est), "out")
    })
}

/// s-perimeter of the region behind an indicator field.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_perimeter(
    field: *const FraclimField,
    potential: *const FraclimPotential,
    s: f64,
    engine: *const FraclimEngine,
    out: *mut FraclimEstimate,
) -> FraclimStatus {
    guard(|| {
        let f = &borrow(field, "field")?.0;
        let region = f.region().ok_or_else(|| {
            FraclimStatusError(FraclimStatus::InvalidArgument, "perimeter needs an indicator field".into())
        })?;
        let a = &borrow(potential, "potential")?.0;
        let e = &borrow(engine, "engine")?.0;
        let per = analysis::perimeter_ps(region, a, s, e)?;
        write(out, FraclimEstimate::from(&per.total), "out")
    })
}

/// 4π^{n/2}/(pΓ(n/2)).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_ms_constant(n: usize, p: f64, out: *mut f64) -> FraclimStatus {
    guard(|| {
        fraclim::model::validate_np(n, p)?;
        write(out, ms_constant(n, p), "out")
    })
}

/// ∫_{S^{n−1}}|ω·σ|^p dσ / p.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_bbm_constant(p: f64, n: usize, out: *mut f64) -> FraclimStatus {
    guard(|| {
        fraclim::model::validate_np(n, p)?;
        write(out, bbm_constant(p, n), "out")
    })
}

/// Fractional Laplacian normalization c(n, s).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclim_cns_normalization(n: usize, s: f64, out: *mut f64) -> FraclimStatus {
    guard(|| write(out, cns_normalization(n, s)?, "out"))
}
