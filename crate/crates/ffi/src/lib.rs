//! C ABI over the dressing-chain library.
//!
//! Ring elements and operators cross the boundary as opaque handles owned by
//! the caller and released with the matching `*_free`. Every fallible call
//! returns a [`DcStatus`]; on failure a message is kept per thread and can be
//! read with [`dc_last_error`]. Matrix data is passed as interleaved
//! `re, im` doubles, site-major, each site's matrix in row-major order, so an
//! element holds `sites * dim * dim * 2` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dressing_chain::cli::{run_verify, RunConfig};
use dressing_chain::darboux::{covariance_residual, dt_potentials, dt_wavefunction, Direction, DressingSeed};
use dressing_chain::{CMat, DifferenceOperator, Error, RingElement, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    Singular = 4,
    Degenerate = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcDirection {
    Plus = 0,
    Minus = 1,
}

/// Opaque ring element.
pub struct DcElement(RingElement);

/// Opaque difference operator.
pub struct DcOperator(DifferenceOperator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn status_of(e: &Error) -> DcStatus {
    match e {
        Error::SingularElement(_) | Error::DenominatorUnderflow(_) => DcStatus::Singular,
        Error::ShapeMismatch(_) | Error::LengthMismatch { .. } | Error::DimensionError(_) => DcStatus::ShapeMismatch,
        Error::DegenerateSpectrum { .. } | Error::DegenerateSeed(_) => DcStatus::Degenerate,
        Error::ParameterError(_) | Error::GridError(_) | Error::StepCountOverflow(_) => DcStatus::InvalidArgument,
        Error::InconsistentRecurrence { .. } | Error::ChainInconsistency { .. } | Error::SeedInconsistent { .. } => {
            DcStatus::Numerical
        }
    }
}

struct Fail(DcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DcStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any failure and converts panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DcStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            DcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds an element from `len = sites * dim * dim * 2` interleaved doubles.
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_element_new(
    sites: usize,
    dim: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut DcElement,
) -> DcStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if sites == 0 || dim == 0 {
            return Err(Fail(DcStatus::InvalidArgument, "sites and dim must be positive".into()));
        }
        let want = sites.checked_mul(dim * dim * 2).ok_or_else(|| Fail(DcStatus::InvalidArgument, "size overflow".into()))?;
        if len != want {
            return Err(Error::LengthMismatch { expected: want, got: len }.into());
        }
        let raw = std::slice::from_raw_parts(data, len);
        let per = dim * dim * 2;
        let values = (0..sites)
            .map(|s| {
                let b = &raw[s * per..(s + 1) * per];
                CMat::from_fn(dim, dim, |i, k| C64::new(b[2 * (i * dim + k)], b[2 * (i * dim + k) + 1]))
            })
            .collect();
        emit(out, DcElement(RingElement::from_values(values)?))
    })
}

/// # Safety
/// `e` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dc_element_free(e: *mut DcElement) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Number of sites, or 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_element_sites(e: *const DcElement) -> usize {
    e.as_ref().map_or(0, |e| e.0.sites())
}

/// Matrix size, or 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_element_dim(e: *const DcElement) -> usize {
    e.as_ref().map_or(0, |e| e.0.dim())
}

/// Copies the element into `buf`, which must hold exactly
/// `sites * dim * dim * 2` doubles.
///
/// # Safety
/// `e` must be a live handle and `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dc_element_copy_data(e: *const DcElement, buf: *mut f64, len: usize) -> DcStatus {
    guard(|| {
        let e = &deref(e, "element")?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let want = e.sites() * e.dim() * e.dim() * 2;
        if len != want {
            return Err(Error::LengthMismatch { expected: want, got: len }.into());
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        let mut j = 0;
        for m in e.values() {
            for i in 0..m.nrows() {
                for k in 0..m.ncols() {
                    out[j] = m[(i, k)].re;
                    out[j + 1] = m[(i, k)].im;
                    j += 2;
                }
            }
        }
        Ok(())
    })
}

/// `(T^m f)(n) = f(n + m)`.
///
/// # Safety
/// `e` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dc_element_shift(e: *const DcElement, m: i64, out: *mut *mut DcElement) -> DcStatus {
    guard(|| {
        let e = &deref(e, "element")?.0;
        emit(out, DcElement(e.shift(m)))
    })
}

/// Sitewise inverse; fails with `Singular` if any site is ill-conditioned.
///
/// # Safety
/// `e` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dc_element_inverse(e: *const DcElement, out: *mut *mut DcElement) -> DcStatus {
    guard(|| {
        let e = &deref(e, "element")?.0;
        emit(out, DcElement(e.inverse()?))
    })
}

/// Operator `sum_m coeffs[m - low] T^m`. The coefficient handles are copied
/// and stay owned by the caller.
///
/// # Safety
/// `coeffs` must point to `count` live element handles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_operator_new(
    low: i64,
    coeffs: *const *const DcElement,
    count: usize,
    out: *mut *mut DcOperator,
) -> DcStatus {
    guard(|| {
        if coeffs.is_null() {
            return Err(null("coeffs"));
        }
        let handles = std::slice::from_raw_parts(coeffs, count);
        let c = handles.iter().map(|&h| deref(h, "coefficient").map(|e| e.0.clone())).collect::<Result<Vec<_>, _>>()?;
        emit(out, DcOperator(DifferenceOperator::new(low, c)?))
    })
}

/// # Safety
/// `op` must come from this library and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dc_operator_free(op: *mut DcOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// # Safety
/// `op` and `psi` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dc_operator_apply(
    op: *const DcOperator,
    psi: *const DcElement,
    out: *mut *mut DcElement,
) -> DcStatus {
    guard(|| {
        let (op, psi) = (&deref(op, "operator")?.0, &deref(psi, "psi")?.0);
        emit(out, DcElement(op.apply(psi)?))
    })
}

/// Dresses `op` with the seed `(phi, mu)` in a stationary frame and writes
/// `|| L1 psi1 - psi1 lambda || / max(1, ||psi1||)` for a second solution
/// `(psi, lambda)` of `L psi = psi lambda`.
///
/// # Safety
/// All handles must be live and `residual` writable.
#[no_mangle]
pub unsafe extern "C" fn dc_dt_covariance(
    op: *const DcOperator,
    phi: *const DcElement,
    mu: *const DcElement,
    direction: DcDirection,
    psi: *const DcElement,
    lambda: *const DcElement,
    residual: *mut f64,
) -> DcStatus {
    guard(|| {
        let op = &deref(op, "operator")?.0;
        let (phi, mu) = (&deref(phi, "phi")?.0, &deref(mu, "mu")?.0);
        let (psi, lambda) = (&deref(psi, "psi")?.0, &deref(lambda, "lambda")?.0);
        if residual.is_null() {
            return Err(null("residual"));
        }
        let dir = match direction {
            DcDirection::Plus => Direction::Plus,
            DcDirection::Minus => Direction::Minus,
        };
        let seed = DressingSeed::from_solution(phi.clone(), mu.clone(), dir)?;
        let zero = RingElement::zero(op.sites(), op.dim());
        let dressed = dt_potentials(op, &seed, &zero)?;
        *residual = covariance_residual(&dressed, &dt_wavefunction(psi, &seed), lambda)?;
        Ok(())
    })
}

/// Runs the verification suite with default settings except for `sites`,
/// `dim` and `seed`, and returns the JSON report in `out` (free it with
/// [`dc_string_free`]). `passed` receives 1 if every check passed, else 0.
///
/// # Safety
/// `out` and `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_verify_json(
    sites: usize,
    dim: usize,
    seed: u64,
    out: *mut *mut c_char,
    passed: *mut i32,
) -> DcStatus {
    guard(|| {
        if out.is_null() || passed.is_null() {
            return Err(null("out"));
        }
        let config = RunConfig { sites, dim, seed, ..RunConfig::default() };
        config.validate().map_err(|e| Fail(DcStatus::InvalidArgument, e.to_string()))?;
        let report = run_verify(&config);
        let s = CString::new(report.to_json()).map_err(|_| Fail(DcStatus::Numerical, "report contains nul".into()))?;
        *passed = i32::from(report.pass);
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn dc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn dc_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    V.as_ptr()
}
