use std::ffi::{CStr, CString};
use std::ptr;

use fraclim_ffi::*;

fn last_error() -> String {
    let p = fraclim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn constants_and_status_codes() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(fraclim_ms_constant(1, 1.0, &mut v), FraclimStatus::Ok);
        assert_eq!(v, 4.0);
        assert_eq!(fraclim_bbm_constant(2.0, 1, &mut v), FraclimStatus::Ok);
        assert!((v - 1.0).abs() < 1e-14);
        assert_eq!(fraclim_cns_normalization(2, 0.5, &mut v), FraclimStatus::Ok);
        assert!((v - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-13);
        assert_eq!(fraclim_cns_normalization(2, 1.5, &mut v), FraclimStatus::InvalidArgument);
        assert!(last_error().contains("s must lie in (0, 1)"));
        assert_eq!(fraclim_ms_constant(1, 2.0, ptr::null_mut()), FraclimStatus::NullPointer);
        assert!(last_error().contains("out"));
    }
}

#[test]
fn energy_through_handles() {
    unsafe {
        let mut field = ptr::null_mut();
        let mut pot = ptr::null_mut();
        let mut engine = ptr::null_mut();
        assert_eq!(fraclim_field_gaussian(1, 1.0, &mut field), FraclimStatus::Ok);
        assert_eq!(fraclim_potential_zero(1, &mut pot), FraclimStatus::Ok);
        assert_eq!(fraclim_engine_det(&mut engine), FraclimStatus::Ok);
        let mut est = FraclimEstimate::default();
        assert_eq!(fraclim_energy(field, pot, 2.0, 0.5, engine, &mut est), FraclimStatus::Ok);
        // 2√(π/2)·2·2^{−3/2}Γ(½)/½ minus the omitted tail
        let exact =
            2.0 * (std::f64::consts::PI / 2.0).sqrt() * 2.0 * 2f64.powf(-1.5) * std::f64::consts::PI.sqrt() / 0.5;
        assert!(est.value <= exact && exact - est.value <= est.trunc_error + 1e-4 * exact);
        assert_eq!(est.stat_error, 0.0);

        assert_eq!(fraclim_energy(field, pot, 2.0, 1.0, engine, &mut est), FraclimStatus::InvalidArgument);
        assert_eq!(fraclim_energy(ptr::null(), pot, 2.0, 0.5, engine, &mut est), FraclimStatus::NullPointer);
        fraclim_field_free(field);
        fraclim_potential_free(pot);
        fraclim_engine_free(engine);
        fraclim_field_free(ptr::null_mut());
    }
}

#[test]
fn spec_parsing_and_perimeter() {
    unsafe {
        let spec = CString::new("indicator:box:lo=0:hi=1").unwrap();
        let mut field = ptr::null_mut();
        assert_eq!(fraclim_field_parse(spec.as_ptr(), 1, &mut field), FraclimStatus::Ok);
        let pspec = CString::new("potential:zero").unwrap();
        let mut pot = ptr::null_mut();
        assert_eq!(fraclim_potential_parse(pspec.as_ptr(), 1, &mut pot), FraclimStatus::Ok);
        let mut engine = ptr::null_mut();
        assert_eq!(fraclim_engine_det(&mut engine), FraclimStatus::Ok);
        let mut est = FraclimEstimate::default();
        assert_eq!(fraclim_perimeter(field, pot, 0.5, engine, &mut est), FraclimStatus::Ok);
        assert!((est.value - 8.0).abs() < 1e-6);

        let bad = CString::new("gaussian:w=1").unwrap();
        let mut g = ptr::null_mut();
        assert_eq!(fraclim_field_parse(bad.as_ptr(), 3, &mut g), FraclimStatus::Ok);
        assert_eq!(fraclim_perimeter(g, pot, 0.5, engine, &mut est), FraclimStatus::InvalidArgument);
        assert!(last_error().contains("indicator"));
        assert_eq!(fraclim_energy(g, pot, 2.0, 0.5, engine, &mut est), FraclimStatus::DimensionMismatch);

        let junk = CString::new("gaussian:q=1").unwrap();
        let mut j = ptr::null_mut();
        assert_eq!(fraclim_field_parse(junk.as_ptr(), 1, &mut j), FraclimStatus::InvalidArgument);
        assert!(j.is_null());
        for f in [field, g] {
            fraclim_field_free(f);
        }
        fraclim_potential_free(pot);
        fraclim_engine_free(engine);
    }
}

#[test]
fn mc_engine_is_reproducible_and_checked() {
    unsafe {
        let mut engine = ptr::null_mut();
        assert_eq!(fraclim_engine_mc(100, 1, 2, &mut engine), FraclimStatus::BudgetTooSmall);
        assert_eq!(fraclim_engine_mc(50_000, 1, 2, &mut engine), FraclimStatus::Ok);
        assert_eq!(fraclim_engine_set_r_max(engine, 0.5), FraclimStatus::InvalidArgument);
        assert_eq!(fraclim_engine_set_r_max(engine, 50.0), FraclimStatus::Ok);
        let mut field = ptr::null_mut();
        let c = [0.0, 0.0];
        assert_eq!(fraclim_field_indicator_ball(2, c.as_ptr(), 1.0, &mut field), FraclimStatus::Ok);
        let a = [1.0, 0.0];
        let mut pot = ptr::null_mut();
        assert_eq!(fraclim_potential_constant(2, a.as_ptr(), &mut pot), FraclimStatus::Ok);
        let (mut e1, mut e2) = (FraclimEstimate::default(), FraclimEstimate::default());
        assert_eq!(fraclim_energy(field, pot, 1.0, 0.4, engine, &mut e1), FraclimStatus::Ok);
        assert_eq!(fraclim_energy(field, pot, 1.0, 0.4, engine, &mut e2), FraclimStatus::Ok);
        assert_eq!(e1, e2);
        assert!(e1.stat_error > 0.0 && e1.samples > 0);
        fraclim_field_free(field);
        fraclim_potential_free(pot);
        fraclim_engine_free(engine);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(fraclim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
