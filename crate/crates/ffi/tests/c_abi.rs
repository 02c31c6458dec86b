use std::ffi::{c_char, CString};
use std::ptr;

use trapping_lab_ffi::*;

fn potential(family: &str, params: &[(&str, f64)]) -> *mut TlPotential {
    let fam = CString::new(family).unwrap();
    let names: Vec<CString> = params.iter().map(|(k, _)| CString::new(*k).unwrap()).collect();
    let ptrs: Vec<*const c_char> = names.iter().map(|n| n.as_ptr()).collect();
    let values: Vec<f64> = params.iter().map(|(_, v)| *v).collect();
    let mut out = ptr::null_mut();
    let st = unsafe { tl_potential_new(fam.as_ptr(), ptrs.as_ptr(), values.as_ptr(), params.len(), 0.0, &mut out) };
    assert_eq!(st, TlStatus::Ok, "{}", last_error());
    out
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { tl_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn potential_round_trip() {
    let p = potential("EckartBarrier", &[("V0", 1.0), ("w", 1.0)]);
    let mut v = 0.0;
    unsafe {
        assert_eq!(tl_potential_eval(p, 0.0, 0, &mut v), TlStatus::Ok);
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(tl_potential_eval(p, 0.0, 2, &mut v), TlStatus::Ok);
        assert!((v + 2.0).abs() < 1e-12);
        assert_eq!(tl_potential_eval(p, 0.0, 7, &mut v), TlStatus::InvalidArgument);
        tl_potential_free(p);
    }
}

#[test]
fn errors_are_reported() {
    let fam = CString::new("Morse").unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { tl_potential_new(fam.as_ptr(), ptr::null(), ptr::null(), 0, 0.0, &mut out) };
    assert_eq!(st, TlStatus::Config);
    assert!(out.is_null());
    assert!(last_error().contains("Morse"));

    let st = unsafe { tl_potential_new(ptr::null(), ptr::null(), ptr::null(), 0, 0.0, &mut out) };
    assert_eq!(st, TlStatus::NullPointer);

    let p = potential("Zero", &[]);
    unsafe {
        assert_eq!(tl_potential_eval(p, 0.0, 0, ptr::null_mut()), TlStatus::NullPointer);
        tl_potential_free(p);
        tl_potential_free(ptr::null_mut());
    }
}

#[test]
fn eckart_classification() {
    let p = potential("EckartBarrier", &[("V0", 1.0)]);
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(tl_classify(p, 1.0, &mut r), TlStatus::Ok);
        let (mut trapping, mut gamma) = (0, 0.0);
        assert_eq!(tl_report_is_trapping(r, &mut trapping), TlStatus::Ok);
        assert_eq!(trapping, 1);
        assert_eq!(tl_report_gamma(r, &mut gamma), TlStatus::Ok);
        assert!((gamma - 2.0).abs() < 1e-3);
        tl_report_free(r);

        assert_eq!(tl_classify(p, 0.5, &mut r), TlStatus::Ok);
        assert_eq!(tl_report_is_trapping(r, &mut trapping), TlStatus::Ok);
        assert_eq!(trapping, 0);
        assert_eq!(tl_report_gamma(r, &mut gamma), TlStatus::InvalidArgument);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(tl_report_hull(r, &mut lo, &mut hi), TlStatus::InvalidArgument);
        tl_report_free(r);
        tl_potential_free(p);
    }
}

#[test]
fn operator_norm_and_sweep() {
    let p = potential("AttractiveBump", &[("A", 1.0)]);
    let mut op = ptr::null_mut();
    unsafe {
        let st = tl_operator_new(p, 20.0, 1.0 / 16.0, 1.2, 8.0, 14.0, 1.0, 3.0, 2.0, &mut op);
        assert_eq!(st, TlStatus::Ok, "{}", last_error());
        let mut n = 0usize;
        assert_eq!(tl_operator_len(op, &mut n), TlStatus::Ok);
        assert!(n >= 800);
        let (mut norm, mut conv) = (0.0, 0);
        assert_eq!(tl_estimate_norm(op, 1.0, 1e-8, 500, 7, &mut norm, &mut conv), TlStatus::Ok);
        assert_eq!(conv, 1);
        assert!(norm > 0.0);
        let (mut sup, mut k, mut z, mut lb) = (0.0, 0.0, 0.0, 0);
        assert_eq!(tl_sweep(op, 1.0, 0.2, 9, 1e-8, &mut sup, &mut k, &mut z, &mut lb), TlStatus::Ok);
        assert!(sup >= norm * (1.0 - 1e-6));
        assert_eq!(k, sup / 16.0);
        assert_eq!(lb, 0);
        assert_eq!(tl_estimate_norm(op, 1.0, 0.5, 500, 7, &mut norm, &mut conv), TlStatus::Config);
        tl_operator_free(op);

        // under-resolved grid is refused
        let st = tl_operator_new(p, 20.0, 1.0 / 16.0, 1.2, 2.0, 14.0, 1.0, 3.0, 2.0, &mut op);
        assert_eq!(st, TlStatus::Config);
        tl_potential_free(p);
    }
}

#[test]
fn fit_selection() {
    let h: Vec<f64> = [16.0, 23.0, 32.0, 45.0, 64.0, 91.0].iter().map(|n| 1.0 / n).collect();
    let v: Vec<f64> = h.iter().map(|h| 3.0 * h.ln().abs() / h).collect();
    let (mut model, mut c, mut param, mut amb) = (TlModel::PowerLaw, 0.0, 0.0, 0);
    unsafe {
        let st = tl_fit_classify(h.as_ptr(), v.as_ptr(), h.len(), &mut model, &mut c, &mut param, &mut amb);
        assert_eq!(st, TlStatus::Ok);
    }
    assert_eq!(model, TlModel::LogEnhanced);
    assert!((c - 3.0).abs() < 1e-9);
    let bad = [0.1, 0.2, 0.3, 0.4, 0.5];
    unsafe {
        let st = tl_fit_classify(bad.as_ptr(), bad.as_ptr(), 5, &mut model, &mut c, &mut param, &mut amb);
        assert_eq!(st, TlStatus::Config);
    }
}
