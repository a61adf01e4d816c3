use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use dressing_chain::{rng, RingContext, RingElement};
use dressing_chain_ffi::*;

fn flatten(e: &RingElement) -> Vec<f64> {
    let mut v = Vec::new();
    for m in e.values() {
        for i in 0..m.nrows() {
            for k in 0..m.ncols() {
                v.extend([m[(i, k)].re, m[(i, k)].im]);
            }
        }
    }
    v
}

fn handle(e: &RingElement) -> *mut DcElement {
    let data = flatten(e);
    let mut out = ptr::null_mut();
    let s = unsafe { dc_element_new(e.sites(), e.dim(), data.as_ptr(), data.len(), &mut out) };
    assert_eq!(s, DcStatus::Ok);
    out
}

fn read(e: *const DcElement) -> Vec<f64> {
    let n = unsafe { dc_element_sites(e) * dc_element_dim(e).pow(2) * 2 };
    let mut buf = vec![0.0; n];
    assert_eq!(unsafe { dc_element_copy_data(e, buf.as_mut_ptr(), n) }, DcStatus::Ok);
    buf
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(dc_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn element_round_trip_and_shift() {
    let c = RingContext::new(5, 2).unwrap();
    let f = c.random_invertible(&mut rng::seeded(3));
    let h = handle(&f);
    assert_eq!(unsafe { (dc_element_sites(h), dc_element_dim(h)) }, (5, 2));
    assert_eq!(read(h), flatten(&f));

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { dc_element_shift(h, 2, &mut s) }, DcStatus::Ok);
    assert_eq!(read(s), flatten(&f.shift(2)));

    let mut inv = ptr::null_mut();
    assert_eq!(unsafe { dc_element_inverse(h, &mut inv) }, DcStatus::Ok);
    let want = flatten(&f.inverse().unwrap());
    for (a, b) in read(inv).iter().zip(&want) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
    unsafe {
        dc_element_free(h);
        dc_element_free(s);
        dc_element_free(inv);
    }
}

#[test]
fn errors_are_reported() {
    let mut out = ptr::null_mut();
    let data = [0.0; 8];
    assert_eq!(unsafe { dc_element_new(2, 1, data.as_ptr(), 3, &mut out) }, DcStatus::ShapeMismatch);
    assert!(last_error().contains("expected 4"));
    assert!(out.is_null());
    assert_eq!(unsafe { dc_element_new(2, 1, ptr::null(), 4, &mut out) }, DcStatus::NullPointer);

    let zero = handle(&RingElement::zero(4, 2));
    assert_eq!(unsafe { dc_element_inverse(zero, &mut out) }, DcStatus::Singular);
    assert!(last_error().contains("singular"));
    assert_eq!(unsafe { dc_element_inverse(ptr::null(), &mut out) }, DcStatus::NullPointer);
    let mut buf = [0.0; 3];
    assert_eq!(unsafe { dc_element_copy_data(zero, buf.as_mut_ptr(), 3) }, DcStatus::ShapeMismatch);
    assert_eq!(unsafe { dc_element_sites(ptr::null()) }, 0);
    unsafe {
        dc_element_free(zero);
        dc_element_free(ptr::null_mut());
        dc_operator_free(ptr::null_mut());
        dc_string_free(ptr::null_mut());
    }
}

#[test]
fn operator_apply_matches_core() {
    let c = RingContext::new(6, 2).unwrap();
    let mut r = rng::seeded(4);
    let op = c.random_operator(&mut r, -1, 2);
    let psi = c.random_element(&mut r);
    let coeffs: Vec<_> = op.coeffs().iter().map(handle).collect();
    let ptrs: Vec<*const DcElement> = coeffs.iter().map(|&p| p as *const _).collect();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dc_operator_new(-1, ptrs.as_ptr(), ptrs.len(), &mut h) }, DcStatus::Ok);
    let p = handle(&psi);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { dc_operator_apply(h, p, &mut out) }, DcStatus::Ok);
    let want = flatten(&op.apply(&psi).unwrap());
    for (a, b) in read(out).iter().zip(&want) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }

    let small = handle(&RingContext::new(3, 2).unwrap().random_element(&mut r));
    assert_eq!(unsafe { dc_operator_apply(h, small, &mut out) }, DcStatus::ShapeMismatch);
    unsafe {
        for e in coeffs.into_iter().chain([p, out, small]) {
            dc_element_free(e);
        }
        dc_operator_free(h);
    }
}

#[test]
fn covariance_through_the_abi() {
    let c = RingContext::new(8, 2).unwrap();
    let mut r = rng::seeded(5);
    let op = c.random_operator(&mut r, -1, 2);
    let pairs = c.eigen_solutions(&op, 4).unwrap();
    let (seed_mu, seed_phi) = c.block_seed(&op, &[0, 1]).unwrap();
    let psi = pairs[2].to_element(c.sites, 2, 0);
    let lambda = RingElement::constant(c.sites, &pairs[2].value_matrix(2));

    let coeffs: Vec<_> = op.coeffs().iter().map(handle).collect();
    let ptrs: Vec<*const DcElement> = coeffs.iter().map(|&p| p as *const _).collect();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dc_operator_new(op.low(), ptrs.as_ptr(), ptrs.len(), &mut h) }, DcStatus::Ok);
    let handles = [handle(&seed_phi), handle(&seed_mu), handle(&psi), handle(&lambda)];
    for dir in [DcDirection::Plus, DcDirection::Minus] {
        let mut res = f64::NAN;
        let s = unsafe { dc_dt_covariance(h, handles[0], handles[1], dir, handles[2], handles[3], &mut res) };
        assert_eq!(s, DcStatus::Ok, "{}", last_error());
        assert!(res <= 1e-8, "{dir:?} residual {res}");
    }
    unsafe {
        for e in coeffs.into_iter().chain(handles) {
            dc_element_free(e);
        }
        dc_operator_free(h);
    }
}

#[test]
fn verify_json_is_deterministic() {
    let run = || {
        let (mut s, mut pass) = (ptr::null_mut(), -1);
        assert_eq!(unsafe { dc_verify_json(6, 1, 2, &mut s, &mut pass) }, DcStatus::Ok);
        let text = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
        unsafe { dc_string_free(s) };
        (text, pass)
    };
    let (a, pa) = run();
    let (b, _) = run();
    assert_eq!(pa, 1);
    assert_eq!(a, b);
    assert!(a.contains("\"pass\": true"));

    let (mut s, mut pass) = (ptr::null_mut(), -1);
    assert_eq!(unsafe { dc_verify_json(1, 1, 2, &mut s, &mut pass) }, DcStatus::InvalidArgument);
    assert!(last_error().contains("sites"));
    assert!(s.is_null());
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(dc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/dressing_chain.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["dc_element_new", "dc_operator_apply", "dc_dt_covariance", "dc_verify_json", "DC_STATUS_SINGULAR"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-xc", "-std=c99"]).arg(&header).output() else {
        eprintln!("no C compiler, syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
