//! C ABI over `impois`.
//!
//! Every fallible function returns an [`ImpoisStatus`] and writes its result
//! through an out-pointer. On failure, [`impois_last_error`] returns a message
//! for the calling thread. Panics never cross the boundary; they surface as
//! `IMPOIS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use impois::constrained::{conflict_mass, ebsb_plausibility, lambda_interval};
use impois::dist::{gamma_cdf, poisson_cdf, poisson_pmf};
use impois::im::one_sided;
use impois::ordering::{build_ranking, diagnostics, Ranking};
use impois::two_sided::{plausibility_interval, point_plausibility};
use impois::{Assertion, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpoisStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    OrderingStopped = 3,
    NotInSupport = 4,
    EmptyLevelSet = 5,
    NoConvergence = 6,
    BufferTooSmall = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpoisSide {
    /// The assertion `theta > theta0`.
    Greater = 0,
    /// The assertion `theta <= theta0`.
    LessEqual = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ImpoisBelief {
    pub belief: f64,
    pub plausibility: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ImpoisInterval {
    pub lower: f64,
    pub upper: f64,
    pub contiguous: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ImpoisLambdaInterval {
    pub lower: f64,
    pub upper: f64,
    pub conflict_mass: f64,
    pub contiguous: bool,
}

/// Opaque ranking handle. Free with [`impois_ranking_free`].
pub struct ImpoisRanking {
    inner: Ranking,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> ImpoisStatus {
    match err {
        Error::Domain(_) | Error::InvalidConfig(_) => ImpoisStatus::InvalidArgument,
        Error::OrderingStopped(_) => ImpoisStatus::OrderingStopped,
        Error::NotInSupport { .. } => ImpoisStatus::NotInSupport,
        Error::EmptyLevelSet { .. } => ImpoisStatus::EmptyLevelSet,
        Error::NoConvergence(_) => ImpoisStatus::NoConvergence,
        Error::Io(_) => ImpoisStatus::Internal,
    }
}

struct Failure(ImpoisStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(ImpoisStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ImpoisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ImpoisStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            ImpoisStatus::Panic
        }
    }
}

/// Writes `value` through `out`, failing on null.
unsafe fn put<T>(out: *mut T, name: &str, value: T) -> Result<(), Failure> {
    match out.as_mut() {
        Some(slot) => {
            *slot = value;
            Ok(())
        }
        None => Err(null(name)),
    }
}

unsafe fn handle<'a>(r: *const ImpoisRanking) -> Result<&'a Ranking, Failure> {
    r.as_ref().map(|h| &h.inner).ok_or_else(|| null("ranking"))
}

/// Message for the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn impois_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_poisson_pmf(x: u64, theta: f64, out: *mut f64) -> ImpoisStatus {
    guard(|| put(out, "out", poisson_pmf(x, theta)?))
}

/// `P(X <= x)`; `x < 0` gives 0.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_poisson_cdf(x: i64, theta: f64, out: *mut f64) -> ImpoisStatus {
    guard(|| put(out, "out", poisson_cdf(x, theta)?))
}

/// Regularized lower incomplete gamma `G_a(theta)`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_gamma_cdf(a: f64, theta: f64, out: *mut f64) -> ImpoisStatus {
    guard(|| put(out, "out", gamma_cdf(a, theta)?))
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_one_sided(x: u64, theta0: f64, side: ImpoisSide, out: *mut ImpoisBelief) -> ImpoisStatus {
    guard(|| {
        let assertion = match side {
            ImpoisSide::Greater => Assertion::greater(theta0)?,
            ImpoisSide::LessEqual => Assertion::less_equal(theta0)?,
        };
        let pair = one_sided(x, &assertion)?;
        put(out, "out", ImpoisBelief { belief: pair.belief, plausibility: pair.plausibility })
    })
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_ranking_new(theta0: f64, epsilon: f64, out: *mut *mut ImpoisRanking) -> ImpoisStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let boxed = Box::new(ImpoisRanking { inner: build_ranking(theta0, epsilon)? });
        *out = Box::into_raw(boxed);
        Ok(())
    })
}

/// # Safety
/// `ranking` must be null or a handle from [`impois_ranking_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn impois_ranking_free(ranking: *mut ImpoisRanking) {
    if !ranking.is_null() {
        drop(Box::from_raw(ranking));
    }
}

/// Number of ranked points.
///
/// # Safety
/// `ranking` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_ranking_len(ranking: *const ImpoisRanking, out: *mut usize) -> ImpoisStatus {
    guard(|| put(out, "out", handle(ranking)?.len()))
}

/// Copies the points in rank order into `buf`, which must hold at least
/// `impois_ranking_len` entries.
///
/// # Safety
/// `ranking` must be a live handle; `buf` must be valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn impois_ranking_support(ranking: *const ImpoisRanking, buf: *mut u64, cap: usize) -> ImpoisStatus {
    guard(|| {
        let r = handle(ranking)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if cap < r.len() {
            return Err(Failure(ImpoisStatus::BufferTooSmall, format!("need {} entries, got {cap}", r.len())));
        }
        ptr::copy_nonoverlapping(r.support().as_ptr(), buf, r.len());
        Ok(())
    })
}

/// 1-based rank of `x`; points beyond the truncation get `len + 1`.
///
/// # Safety
/// `ranking` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_ranking_rank(ranking: *const ImpoisRanking, x: u64, out: *mut usize) -> ImpoisStatus {
    guard(|| put(out, "out", handle(ranking)?.rank(x)))
}

/// Cumulative `T(r)` and `V(r)` along the ranking. Both buffers must hold
/// `impois_ranking_len` entries.
///
/// # Safety
/// `ranking` must be a live handle; `t` and `v` must be valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn impois_ranking_diagnostics(
    ranking: *const ImpoisRanking,
    t: *mut f64,
    v: *mut f64,
    cap: usize,
) -> ImpoisStatus {
    guard(|| {
        let r = handle(ranking)?;
        if t.is_null() || v.is_null() {
            return Err(null("t or v"));
        }
        if cap < r.len() {
            return Err(Failure(ImpoisStatus::BufferTooSmall, format!("need {} entries, got {cap}", r.len())));
        }
        let d = diagnostics(r);
        ptr::copy_nonoverlapping(d.t.as_ptr(), t, r.len());
        ptr::copy_nonoverlapping(d.v.as_ptr(), v, r.len());
        Ok(())
    })
}

/// Plausibility of `{theta0}` given `x`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_point_plausibility(x: u64, theta0: f64, epsilon: f64, out: *mut f64) -> ImpoisStatus {
    guard(|| put(out, "out", point_plausibility(x, theta0, epsilon)?))
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_plausibility_interval(
    x: u64,
    alpha: f64,
    epsilon: f64,
    out: *mut ImpoisInterval,
) -> ImpoisStatus {
    guard(|| {
        let iv = plausibility_interval(x, alpha, epsilon)?;
        put(out, "out", ImpoisInterval { lower: iv.lower, upper: iv.upper, contiguous: iv.contiguous })
    })
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_conflict_mass(x: u64, beta: f64, epsilon: f64, out: *mut f64) -> ImpoisStatus {
    guard(|| put(out, "out", conflict_mass(x, beta, epsilon)?))
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_ebsb_plausibility(
    x: u64,
    theta0: f64,
    beta: f64,
    epsilon: f64,
    out: *mut f64,
) -> ImpoisStatus {
    guard(|| put(out, "out", ebsb_plausibility(x, theta0, beta, epsilon)?))
}

/// Interval for the signal `lambda = theta - beta`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn impois_lambda_interval(
    x: u64,
    beta: f64,
    alpha: f64,
    epsilon: f64,
    out: *mut ImpoisLambdaInterval,
) -> ImpoisStatus {
    guard(|| {
        let li = lambda_interval(x, beta, alpha, epsilon)?;
        put(
            out,
            "out",
            ImpoisLambdaInterval {
                lower: li.lower(),
                upper: li.upper(),
                conflict_mass: li.conflict_mass,
                contiguous: li.interval.contiguous,
            },
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn status_codes_are_stable() {
        assert_eq!(ImpoisStatus::Ok as i32, 0);
        assert_eq!(ImpoisStatus::OrderingStopped as i32, 3);
        assert_eq!(ImpoisStatus::Panic as i32, 9);
    }

    #[test]
    fn guard_catches_panics() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, ImpoisStatus::Panic);
        let msg = unsafe { CStr::from_ptr(impois_last_error()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
    }

    #[test]
    fn interior_nul_is_scrubbed() {
        set_last_error("a\0b".into());
        let msg = unsafe { CStr::from_ptr(impois_last_error()) }.to_str().unwrap();
        assert_eq!(msg, "a b");
    }
}
