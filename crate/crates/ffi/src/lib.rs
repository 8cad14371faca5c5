//! C ABI for sadic-core.
//!
//! Handles are opaque and owned by the caller once returned; each has a
//! matching `*_free`. Every call returns a [`SadicStatus`]; on failure the
//! message is available from [`sadic_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sadic_core::build_rank::{build_rank_subshift, RankConfig};
use sadic_core::build_toe::{build_toeplitz_reduction, ToeConfig};
use sadic_core::gamma::{fn_equivalent, gamma_from_system, orbit_equivalent, GammaModule};
use sadic_core::gsq::{read_gsq, write_gsq};
use sadic_core::measures::MeasureVector;
use sadic_core::scalars::{default_precision, dyadic_width, ParamBasis};
use sadic_core::verify::verify_by_header;
use sadic_core::words::GeneratingSequence;
use sadic_core::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SadicStatus {
    Ok = 0,
    InvalidArgument = 1,
    Parse = 2,
    /// Precision ran out before a comparison was decided.
    Indeterminate = 3,
    Infeasible = 4,
    Io = 5,
    VerificationFailed = 6,
    Internal = 7,
}

/// A parameter basis.
pub struct SadicBasis(ParamBasis);

/// A generating sequence with its recorded measures.
pub struct SadicSystem {
    gs: GeneratingSequence,
    mv: MeasureVector,
}

/// A Gamma module.
pub struct SadicGamma(GammaModule);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (SadicStatus, String);

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SadicStatus {
    match e {
        Error::Indeterminate(_) => SadicStatus::Indeterminate,
        Error::Infeasible { .. } => SadicStatus::Infeasible,
        Error::Io(_) => SadicStatus::Io,
        Error::Gsq { .. } | Error::ParseExpr { .. } | Error::InvalidBasis(_) => SadicStatus::Parse,
        Error::Oracle(_) => SadicStatus::Internal,
        _ => SadicStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> Failure {
    (status_of(&e), e.to_string())
}

fn bad(msg: &str) -> Failure {
    (SadicStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SadicStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SadicStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            SadicStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(bad(&format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SadicStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| bad(&format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(bad(&format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on this thread.
#[no_mangle]
pub extern "C" fn sadic_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn sadic_status_name(status: SadicStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SadicStatus::Ok => c"ok",
        SadicStatus::InvalidArgument => c"invalid argument",
        SadicStatus::Parse => c"parse error",
        SadicStatus::Indeterminate => c"indeterminate",
        SadicStatus::Infeasible => c"infeasible",
        SadicStatus::Io => c"i/o error",
        SadicStatus::VerificationFailed => c"verification failed",
        SadicStatus::Internal => c"internal error",
    };
    s.as_ptr()
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn sadic_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a basis file's text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sadic_basis_parse(
    text_in: *const c_char,
    out: *mut *mut SadicBasis,
) -> SadicStatus {
    guard(|| {
        let t = text(text_in, "text")?;
        let b = ParamBasis::parse(t, None).map_err(fail)?;
        put(out, boxed(SadicBasis(b)), "out")
    })
}

/// Basis `1, sqrt(p_1), .., sqrt(p_len)`.
///
/// # Safety
/// `primes` must point to `len` integers and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn sadic_basis_sqrt_primes(
    primes: *const u64,
    len: usize,
    out: *mut *mut SadicBasis,
) -> SadicStatus {
    guard(|| {
        if primes.is_null() && len > 0 {
            return Err(bad("primes is null"));
        }
        let ps = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(primes, len)
        };
        let b = ParamBasis::sqrt_primes(ps).map_err(fail)?;
        put(out, boxed(SadicBasis(b)), "out")
    })
}

/// Number of basis entries, the constant included; 0 for null.
///
/// # Safety
/// `basis` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sadic_basis_len(basis: *const SadicBasis) -> usize {
    basis.as_ref().map_or(0, |b| b.0.len())
}

/// # Safety
/// `basis` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sadic_basis_free(basis: *mut SadicBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// Binary Toeplitz construction from comma-separated basis entry names.
///
/// # Safety
/// Pointers must be live; `params` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sadic_construct_toe(
    basis: *const SadicBasis,
    params: *const c_char,
    levels: usize,
    out: *mut *mut SadicSystem,
) -> SadicStatus {
    guard(|| {
        let b = handle(basis, "basis")?;
        let names = split_list(text(params, "params")?);
        let cfg = ToeConfig::from_names(b.0.clone(), &names, levels).map_err(fail)?;
        let (gs, mv) = build_toeplitz_reduction(&cfg).map_err(fail)?;
        put(out, boxed(SadicSystem { gs, mv }), "out")
    })
}

/// `n`-letter construction from comma-separated parameter expressions.
///
/// # Safety
/// Pointers must be live; `params` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sadic_construct_rank(
    basis: *const SadicBasis,
    n: usize,
    params: *const c_char,
    levels: usize,
    out: *mut *mut SadicSystem,
) -> SadicStatus {
    guard(|| {
        let b = handle(basis, "basis")?;
        let exprs = split_list(text(params, "params")?);
        let cfg = RankConfig::from_exprs(b.0.clone(), n, &exprs, levels).map_err(fail)?;
        let (gs, mv) = build_rank_subshift(&cfg).map_err(fail)?;
        put(out, boxed(SadicSystem { gs, mv }), "out")
    })
}

/// Reads GSQ text.
///
/// # Safety
/// `gsq` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sadic_system_read_gsq(
    gsq: *const c_char,
    out: *mut *mut SadicSystem,
) -> SadicStatus {
    guard(|| {
        let (gs, mv) = read_gsq(text(gsq, "gsq")?).map_err(fail)?;
        put(out, boxed(SadicSystem { gs, mv }), "out")
    })
}

/// Writes GSQ text into `*out`; release it with [`sadic_string_free`].
///
/// # Safety
/// `system` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sadic_system_write_gsq(
    system: *const SadicSystem,
    out: *mut *mut c_char,
) -> SadicStatus {
    guard(|| {
        let s = handle(system, "system")?;
        let c = CString::new(write_gsq(&s.gs, &s.mv))
            .map_err(|e| (SadicStatus::Internal, e.to_string()))?;
        put(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sadic_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// First and last level numbers.
///
/// # Safety
/// `system` must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sadic_system_levels(
    system: *const SadicSystem,
    first: *mut usize,
    last: *mut usize,
) -> SadicStatus {
    guard(|| {
        let s = handle(system, "system")?;
        put(first, s.gs.first_level(), "first")?;
        put(last, s.gs.last_level(), "last")
    })
}

/// Number of words at `level`.
///
/// # Safety
/// `system` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sadic_system_word_count(
    system: *const SadicSystem,
    level: usize,
    out: *mut usize,
) -> SadicStatus {
    guard(|| {
        let s = handle(system, "system")?;
        put(out, s.gs.word_count(level).map_err(fail)?, "out")
    })
}

/// Runs the verifier named by the system's engine header. Counts go to the
/// optional outputs; the status is `VERIFICATION_FAILED` on any failed check
/// and `INDETERMINATE` when checks only ran out of precision.
/// `precision_bits` 0 selects the default.
///
/// # Safety
/// Handles must be live; each output null or writable.
#[no_mangle]
pub unsafe extern "C" fn sadic_system_verify(
    system: *const SadicSystem,
    basis: *const SadicBasis,
    precision_bits: u32,
    passed: *mut usize,
    failed: *mut usize,
    unverifiable: *mut usize,
) -> SadicStatus {
    guard(|| {
        let s = handle(system, "system")?;
        let b = handle(basis, "basis")?;
        let prec = if precision_bits == 0 {
            default_precision()
        } else {
            dyadic_width(precision_bits)
        };
        let report = verify_by_header(&s.gs, &s.mv, &b.0, &prec)
            .map_err(fail)?
            .ok_or_else(|| bad("system header names no known engine"))?;
        let nf = report.failures().count();
        let nu = report.unverifiable().count();
        for (p, v) in [
            (passed, report.checks.len() - nf - nu),
            (failed, nf),
            (unverifiable, nu),
        ] {
            if !p.is_null() {
                p.write(v);
            }
        }
        if let Some(f) = report.first_failure() {
            return Err((SadicStatus::VerificationFailed, f.to_string()));
        }
        if let Some(u) = report.unverifiable().next() {
            return Err((SadicStatus::Indeterminate, u.to_string()));
        }
        Ok(())
    })
}

/// # Safety
/// `system` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sadic_system_free(system: *mut SadicSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Gamma module spanned by `1` and the measures of levels up to `depth`
/// (clamped to the last level).
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sadic_gamma_from_system(
    system: *const SadicSystem,
    basis: *const SadicBasis,
    depth: usize,
    out: *mut *mut SadicGamma,
) -> SadicStatus {
    guard(|| {
        let s = handle(system, "system")?;
        let b = handle(basis, "basis")?;
        let (g, _) = gamma_from_system(&s.gs, &s.mv, depth, b.0.len()).map_err(fail)?;
        put(out, boxed(SadicGamma(g)), "out")
    })
}

/// Q-dimension of the module; 0 for null.
///
/// # Safety
/// `gamma` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn sadic_gamma_dimension(gamma: *const SadicGamma) -> usize {
    gamma.as_ref().map_or(0, |g| g.0.dimension())
}

/// Whether the modules agree up to a coordinate permutation. When `perm`
/// is non-null and the answer is yes, the permutation (length `K`) is
/// written there.
///
/// # Safety
/// Handles live; `equivalent` writable; `perm` null or room for `K` entries.
#[no_mangle]
pub unsafe extern "C" fn sadic_gamma_orbit_equivalent(
    a: *const SadicGamma,
    b: *const SadicGamma,
    equivalent: *mut bool,
    perm: *mut usize,
) -> SadicStatus {
    guard(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        let p = orbit_equivalent(&a.0, &b.0);
        if let (Some(p), false) = (&p, perm.is_null()) {
            std::slice::from_raw_parts_mut(perm, p.len()).copy_from_slice(p);
        }
        put(equivalent, p.is_some(), "equivalent")
    })
}

/// # Safety
/// `gamma` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sadic_gamma_free(gamma: *mut SadicGamma) {
    if !gamma.is_null() {
        drop(Box::from_raw(gamma));
    }
}

/// Whether `span{x.., 1} = span{y.., 1}` for comma-separated expressions.
///
/// # Safety
/// Pointers live and NUL-terminated; `equivalent` writable.
#[no_mangle]
pub unsafe extern "C" fn sadic_fn_equivalent(
    basis: *const SadicBasis,
    xs: *const c_char,
    ys: *const c_char,
    equivalent: *mut bool,
) -> SadicStatus {
    guard(|| {
        let b = handle(basis, "basis")?;
        let parse = |s: &str| {
            split_list(s)
                .into_iter()
                .map(|e| b.0.parse_expr(e))
                .collect::<Result<Vec<_>, _>>()
                .map_err(fail)
        };
        let x = parse(text(xs, "xs")?)?;
        let y = parse(text(ys, "ys")?)?;
        if x.len() != y.len() {
            return Err(bad("tuples differ in length"));
        }
        put(equivalent, fn_equivalent(&x, &y), "equivalent")
    })
}
