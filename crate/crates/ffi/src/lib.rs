//! C ABI over the float backend of `menugap`.
//!
//! Objects cross the boundary as opaque handles created by `mg_sequence_build` or the `mg_*_from_json` parsers
//! and released with the matching `mg_*_free`. Every fallible call returns an
//! [`MgStatus`]; on failure the message is available from [`mg_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use menugap::auctions::{brev, revenue, verify_ic_ir, DiscreteDistribution, Mechanism};
use menugap::constructions::Construction;
use menugap::gapcore::{sup_gap, PointSequence};
use menugap::gapopt::{lagrel_value, menu_gap_lp, optimal_mechanism_lp};
use menugap::io;
use menugap::transforms::theorem_main_pipeline;
use menugap::Error;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    InvalidUtf8 = 3,
    Numerical = 4,
    Panic = 5,
}

/// Point sequence in the nonnegative orthant.
pub struct MgSequence(PointSequence<f64>);

/// Finite value distribution.
pub struct MgDistribution(DiscreteDistribution<f64>);

/// Menu of (allocation, price) entries including the zero option.
pub struct MgMechanism(Mechanism<f64>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(err: Error) -> MgStatus {
    let status = if err.is_input_error() {
        MgStatus::InvalidInput
    } else {
        MgStatus::Numerical
    };
    set_error(err.to_string());
    status
}

fn guard(f: impl FnOnce() -> Result<(), MgStatus>) -> MgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            MgStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, MgStatus> {
    if p.is_null() {
        set_error("null pointer argument");
        Err(MgStatus::NullPointer)
    } else {
        Ok(&*p)
    }
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), MgStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(MgStatus::NullPointer);
    }
    out.write(v);
    Ok(())
}

unsafe fn parse_json(s: *const c_char) -> Result<serde_json::Value, MgStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(MgStatus::NullPointer);
    }
    let text = CStr::from_ptr(s).to_str().map_err(|e| {
        set_error(e.to_string());
        MgStatus::InvalidUtf8
    })?;
    serde_json::from_str(text).map_err(|e| fail(Error::Json(e)))
}

fn source() -> &'static Path {
    Path::new("<ffi>")
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next `mg_*` call on the same thread.
#[no_mangle]
pub extern "C" fn mg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn mg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the layered construction with layers 2..=`layers`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_sequence_build(layers: usize, out: *mut *mut MgSequence) -> MgStatus {
    guard(|| {
        let c = Construction::<f64>::with_layers(layers).map_err(fail)?;
        write(out, Box::into_raw(Box::new(MgSequence(c.x))))
    })
}

/// Parses `{"k": .., "points": [[..], ..]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_sequence_from_json(
    json: *const c_char,
    out: *mut *mut MgSequence,
) -> MgStatus {
    guard(|| {
        let v = parse_json(json)?;
        let x = io::points_from_json::<f64>(&v, source()).map_err(fail)?;
        write(out, Box::into_raw(Box::new(MgSequence(x))))
    })
}

/// Number of points, or 0 for NULL.
///
/// # Safety
/// `seq` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_sequence_len(seq: *const MgSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `seq` must be NULL or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn mg_sequence_free(seq: *mut MgSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Optimal menu gap over allocation sequences, solved as a linear program.
///
/// # Safety
/// `seq` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_menugap_lp(seq: *const MgSequence, out: *mut f64) -> MgStatus {
    guard(|| {
        let s = deref(seq)?;
        let sol = menu_gap_lp(&s.0).map_err(fail)?;
        write(out, sol.objective)
    })
}

/// Menu gap of the sequence against its own normalized points.
///
/// # Safety
/// `seq` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_supgap(seq: *const MgSequence, out: *mut f64) -> MgStatus {
    guard(|| {
        let s = deref(seq)?;
        write(out, sup_gap(&s.0).map_err(fail)?.total)
    })
}

/// Lagrangian upper bound on the aligned gap of a unit-norm sequence.
///
/// # Safety
/// `seq` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_lagrel_bound(seq: *const MgSequence, out: *mut f64) -> MgStatus {
    guard(|| {
        let s = deref(seq)?;
        write(out, lagrel_value(&s.0).map_err(fail)?.to_f64())
    })
}

/// Parses `{"k": .., "support": [{"v": [..], "p": ..}, ..]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_distribution_from_json(
    json: *const c_char,
    out: *mut *mut MgDistribution,
) -> MgStatus {
    guard(|| {
        let v = parse_json(json)?;
        let d = io::distribution_from_json::<f64>(&v, source()).map_err(fail)?;
        write(out, Box::into_raw(Box::new(MgDistribution(d))))
    })
}

/// Number of support points, or 0 for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_distribution_len(d: *const MgDistribution) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `d` must be NULL or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn mg_distribution_free(d: *mut MgDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Parses `{"k": .., "menu": [{"q": [..], "price": ..}, ..]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_mechanism_from_json(
    json: *const c_char,
    out: *mut *mut MgMechanism,
) -> MgStatus {
    guard(|| {
        let v = parse_json(json)?;
        let m = io::mechanism_from_json::<f64>(&v, source()).map_err(fail)?;
        write(out, Box::into_raw(Box::new(MgMechanism(m.mechanism))))
    })
}

/// Number of menu entries including the zero option, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_mechanism_len(m: *const MgMechanism) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// Serializes a mechanism to JSON; release with [`mg_string_free`].
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_mechanism_to_json(
    m: *const MgMechanism,
    out: *mut *mut c_char,
) -> MgStatus {
    guard(|| {
        let m = deref(m)?;
        let text = io::mechanism_to_json(&m.0, None).to_string();
        let s = CString::new(text).map_err(|e| {
            set_error(e.to_string());
            MgStatus::InvalidUtf8
        })?;
        write(out, s.into_raw())
    })
}

/// # Safety
/// `m` must be NULL or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn mg_mechanism_free(m: *mut MgMechanism) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Revenue-optimal mechanism; writes the handle and its revenue.
///
/// # Safety
/// `d` must be a live handle; `out` and `out_revenue` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mg_optimal_mechanism(
    d: *const MgDistribution,
    out: *mut *mut MgMechanism,
    out_revenue: *mut f64,
) -> MgStatus {
    guard(|| {
        let d = deref(d)?;
        let opt = optimal_mechanism_lp(&d.0).map_err(fail)?;
        write(out_revenue, opt.revenue)?;
        write(out, Box::into_raw(Box::new(MgMechanism(opt.mechanism))))
    })
}

/// Expected revenue and aligned revenue of `m` on `d`.
///
/// # Safety
/// `d`, `m` must be live handles; output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn mg_revenue(
    d: *const MgDistribution,
    m: *const MgMechanism,
    tolerance: f64,
    out_rev: *mut f64,
    out_arev: *mut f64,
) -> MgStatus {
    guard(|| {
        let (d, m) = (deref(d)?, deref(m)?);
        let rep = revenue(&d.0, &m.0, tolerance).map_err(fail)?;
        write(out_rev, rep.rev)?;
        write(out_arev, rep.arev)
    })
}

/// Best grand-bundle price and its revenue.
///
/// # Safety
/// `d` must be a live handle; output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn mg_brev(
    d: *const MgDistribution,
    out_price: *mut f64,
    out_value: *mut f64,
) -> MgStatus {
    guard(|| {
        let d = deref(d)?;
        let (price, value) = brev(&d.0);
        write(out_price, price)?;
        write(out_value, value)
    })
}

/// Writes whether every buyer's choice is individually rational and incentive compatible.
///
/// # Safety
/// `d`, `m` must be live handles; `out_ok` valid.
#[no_mangle]
pub unsafe extern "C" fn mg_verify_ic(
    d: *const MgDistribution,
    m: *const MgMechanism,
    tolerance: f64,
    out_ok: *mut bool,
) -> MgStatus {
    guard(|| {
        let (d, m) = (deref(d)?, deref(m)?);
        let rep = verify_ic_ir(&d.0, &m.0, None, tolerance).map_err(fail)?;
        write(out_ok, rep.ok)
    })
}

/// Runs the revenue-certificate pipeline and returns the certificate as JSON.
/// Release the string with [`mg_string_free`].
///
/// # Safety
/// `d` must be a live handle; `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn mg_certify(
    d: *const MgDistribution,
    tolerance: f64,
    out_json: *mut *mut c_char,
) -> MgStatus {
    guard(|| {
        let d = deref(d)?;
        let cert = theorem_main_pipeline(&d.0, tolerance).map_err(fail)?;
        let s = CString::new(cert.to_json().to_string()).map_err(|e| {
            set_error(e.to_string());
            MgStatus::InvalidUtf8
        })?;
        write(out_json, s.into_raw())
    })
}
