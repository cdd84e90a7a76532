//! C ABI over `upset_poincare`.
//!
//! Sets are opaque `UpMonotoneSet` handles created by `up_set_*` and released
//! with `up_set_free`. Every fallible call returns an `UpStatus`; on failure
//! `up_last_error_message` describes the error for the calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use upset_poincare::cube::{enumerate_monotone, MonotoneSet, SetDescription};
use upset_poincare::forms::{self, SetFunction};
use upset_poincare::induction::{self, InductionParams};
use upset_poincare::spectral::{self, SolverMethod};
use upset_poincare::walk::{self, CensoredKernel, StartPolicy};
use upset_poincare::Error;

/// Opaque handle to a monotone set.
pub struct UpMonotoneSet(Arc<MonotoneSet>);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    NotMonotone = 4,
    Dimension = 5,
    Numerical = 6,
    Violation = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UpSetInfo {
    pub dim: u32,
    pub size: u64,
    pub density: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UpSpectral {
    /// Zero for a singleton.
    pub lambda2: f64,
    /// `2 / lambda2`, or zero for a singleton.
    pub cstar: f64,
    pub bound_fp: f64,
    pub bound_ours: f64,
    pub residual: f64,
    pub iterative: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UpMixing {
    pub t_mix: u64,
    /// False when only the heuristic start set was scanned.
    pub exhaustive: bool,
    pub gap: f64,
    pub bound_spectral: u64,
    pub bound_poincare: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UpInductionParams {
    pub a0: f64,
    pub a1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UpFivePoint {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> UpStatus {
    match e {
        Error::Parse(_) => UpStatus::Parse,
        Error::NotMonotone { .. } => UpStatus::NotMonotone,
        Error::DimensionOutOfRange { .. } | Error::PointOutOfRange { .. } | Error::EnumerationCap(_) => UpStatus::Dimension,
        Error::NoConvergence { .. } | Error::MixingCap(_) => UpStatus::Numerical,
        e if e.is_violation() => UpStatus::Violation,
        _ => UpStatus::InvalidArgument,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (UpStatus, String)>) -> UpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UpStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            UpStatus::Panic
        }
    }
}

fn lift<T>(r: upset_poincare::Result<T>) -> Result<T, (UpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (UpStatus, String) {
    (UpStatus::NullPointer, "null pointer argument".into())
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, (UpStatus, String)> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write_out<T>(p: *mut T, v: T) -> Result<(), (UpStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    p.write(v);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], (UpStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn emit_set(out: *mut *mut UpMonotoneSet, set: MonotoneSet) -> Result<(), (UpStatus, String)> {
    write_out(out, Box::into_raw(Box::new(UpMonotoneSet(Arc::new(set)))))
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn up_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn up_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a set from a description such as `"threshold 5 3"` or
/// `"upset 3 011,101"`.
#[no_mangle]
pub unsafe extern "C" fn up_set_parse(desc: *const c_char, out: *mut *mut UpMonotoneSet) -> UpStatus {
    guard(|| {
        if desc.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(desc).to_str().map_err(|_| (UpStatus::Parse, "description is not utf-8".to_string()))?;
        let d: SetDescription = lift(text.parse())?;
        emit_set(out, lift(d.build())?)
    })
}

/// `{x in {0,1}^n : |x| >= k}`.
#[no_mangle]
pub unsafe extern "C" fn up_set_threshold(n: u32, k: u32, out: *mut *mut UpMonotoneSet) -> UpStatus {
    guard(|| emit_set(out, lift(MonotoneSet::threshold(n as usize, k as usize))?))
}

/// Set from explicit member indices; fails with `NotMonotone` otherwise.
#[no_mangle]
pub unsafe extern "C" fn up_set_from_members(
    n: u32,
    members: *const u32,
    len: usize,
    out: *mut *mut UpMonotoneSet,
) -> UpStatus {
    guard(|| {
        if members.is_null() && len > 0 {
            return Err(null());
        }
        let m = if len == 0 { &[][..] } else { std::slice::from_raw_parts(members, len) };
        emit_set(out, lift(MonotoneSet::from_members(n as usize, m))?)
    })
}

/// Releases a handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn up_set_free(set: *mut UpMonotoneSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

#[no_mangle]
pub unsafe extern "C" fn up_set_info(set: *const UpMonotoneSet, out: *mut UpSetInfo) -> UpStatus {
    guard(|| {
        let s = &deref(set)?.0;
        write_out(out, UpSetInfo { dim: s.dim() as u32, size: s.size() as u64, density: s.density() })
    })
}

#[no_mangle]
pub unsafe extern "C" fn up_set_contains(set: *const UpMonotoneSet, index: u64, out: *mut bool) -> UpStatus {
    guard(|| {
        let s = &deref(set)?.0;
        let inside = index < (1u64 << s.dim()) && s.contains(index as u32);
        write_out(out, inside)
    })
}

/// Copies up to `cap` member indices (ascending) into `buf` and stores the
/// total member count in `len`. Pass `cap = 0` to query the count.
#[no_mangle]
pub unsafe extern "C" fn up_set_members(set: *const UpMonotoneSet, buf: *mut u32, cap: usize, len: *mut usize) -> UpStatus {
    guard(|| {
        let s = &deref(set)?.0;
        let m = s.members();
        if cap > 0 {
            if buf.is_null() {
                return Err(null());
            }
            let k = cap.min(m.len());
            std::ptr::copy_nonoverlapping(m.as_ptr(), buf, k);
        }
        write_out(len, m.len())
    })
}

unsafe fn function(set: *const UpMonotoneSet, values: *const f64, len: usize) -> Result<SetFunction, (UpStatus, String)> {
    let s = deref(set)?.0.clone();
    lift(SetFunction::new(s, slice(values, len)?.to_vec()))
}

/// Restricted Dirichlet form of `values` (one per member, ascending index).
#[no_mangle]
pub unsafe extern "C" fn up_dirichlet_form(set: *const UpMonotoneSet, values: *const f64, len: usize, out: *mut f64) -> UpStatus {
    guard(|| write_out(out, forms::dirichlet_form(&function(set, values, len)?)))
}

/// Variance of `values` under the uniform law on the set.
#[no_mangle]
pub unsafe extern "C" fn up_variance(set: *const UpMonotoneSet, values: *const f64, len: usize, out: *mut f64) -> UpStatus {
    guard(|| write_out(out, forms::variance(&function(set, values, len)?)))
}

#[no_mangle]
pub unsafe extern "C" fn up_poincare_constant(set: *const UpMonotoneSet, out: *mut UpSpectral) -> UpStatus {
    guard(|| {
        let s = &deref(set)?.0;
        let c = lift(spectral::verify_theorem(s))?;
        write_out(
            out,
            UpSpectral {
                lambda2: c.lambda2.unwrap_or(0.0),
                cstar: c.cstar,
                bound_fp: c.bound_fp,
                bound_ours: c.bound_ours,
                residual: c.residual,
                iterative: c.method == Some(SolverMethod::Iterative),
            },
        )
    })
}

/// Worst-start mixing time and both bounds; requires `theta >= 1/2`.
#[no_mangle]
pub unsafe extern "C" fn up_exact_tmix(set: *const UpMonotoneSet, theta: f64, epsilon: f64, out: *mut UpMixing) -> UpStatus {
    guard(|| {
        let s = deref(set)?.0.clone();
        let kernel = lift(CensoredKernel::new(s.clone(), theta))?;
        let policy = StartPolicy::for_size(s.size());
        let t = lift(walk::exact_tmix(&kernel, epsilon, policy, walk::DEFAULT_MAX_STEPS))?;
        let gap = if s.size() > 1 { Some(lift(walk::chain_gap(&kernel))?.gap) } else { None };
        let b = lift(walk::tmix_bound(&kernel, epsilon, gap))?;
        write_out(
            out,
            UpMixing {
                t_mix: t.t_mix,
                exhaustive: policy == StartPolicy::Exhaustive,
                gap: gap.unwrap_or(0.0),
                bound_spectral: b.spectral,
                bound_poincare: b.poincare,
            },
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn up_five_point(params: *const UpInductionParams, out: *mut UpFivePoint) -> UpStatus {
    guard(|| {
        let p = deref(params)?;
        let ip = lift(InductionParams::new(p.a0, p.a1, p.alpha, p.beta, p.gamma, p.c))?;
        let r = lift(induction::five_point(&ip))?;
        write_out(out, UpFivePoint { lhs: r.lhs, rhs: r.rhs, holds: r.holds })
    })
}

/// `B^2 - 4AC` of the induction quadratic.
#[no_mangle]
pub unsafe extern "C" fn up_discriminant(a0: f64, a1: f64, c: f64, out: *mut f64) -> UpStatus {
    guard(|| write_out(out, lift(induction::discriminant(a0, a1, c))?.delta))
}

/// `(u - s + 1)(u - t + 1) - 1`; `det G` is `a0^2 / 4` times this.
#[no_mangle]
pub unsafe extern "C" fn up_g_psd_margin(a0: f64, a1: f64, out: *mut f64) -> UpStatus {
    guard(|| write_out(out, lift(induction::g_psd_margin(a0, a1))?.product))
}

/// Number of nonempty monotone sets in dimension `n` (1..=5).
#[no_mangle]
pub unsafe extern "C" fn up_enumerate_count(n: u32, out: *mut u64) -> UpStatus {
    guard(|| write_out(out, lift(enumerate_monotone(n as usize))?.count() as u64))
}
