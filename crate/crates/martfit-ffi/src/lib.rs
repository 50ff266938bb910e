//! C ABI over the martfit core: opaque handles, status codes, and a
//! generated `include/martfit.h`. All functions are
//! `martfit_*`, return a [`MartfitStatus`], and write results through out
//! pointers. Handles are created by `_new`/`_parse` functions and must be
//! released with the matching `_free`; passing a handle to any other
//! thread is safe, sharing it across threads concurrently is safe for
//! reads (all operations on a built handle are read-only).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use martfit::error::MartfitError;
use martfit::extremal::{extremal_chain, ExtremalSurface};
use martfit::marginal::CallSurface;
use martfit::skorokhod::SurfaceSampler;

/// Status codes returned by every API function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MartfitStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Input text was not valid UTF-8.
    Utf8 = 2,
    /// Input text failed to parse.
    ParseError = 3,
    /// Marginal, slice or surface invariants violated.
    Invalid = 4,
    /// Argument outside its mathematical domain.
    Domain = 5,
    /// Marginals not in convex order.
    ConvexOrder = 6,
    /// Internal consistency failure.
    Internal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &MartfitError) -> MartfitStatus {
    match err {
        MartfitError::Parse { .. } => MartfitStatus::ParseError,
        MartfitError::InvalidMarginal(_)
        | MartfitError::InvalidSlice(_)
        | MartfitError::InvalidSurface(_) => MartfitStatus::Invalid,
        MartfitError::Domain(_) => MartfitStatus::Domain,
        MartfitError::ConvexOrder(_) => MartfitStatus::ConvexOrder,
        MartfitError::Internal(_) | MartfitError::Io(_) => MartfitStatus::Internal,
    }
}

fn run(f: impl FnOnce() -> MartfitStatus) -> MartfitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic across the FFI boundary");
            MartfitStatus::Internal
        }
    }
}

fn fail(err: MartfitError) -> MartfitStatus {
    set_error(&err.to_string());
    status_of(&err)
}

/// Message for the most recent error on this thread; valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn martfit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// A validated-on-construction family of marginals (opaque).
pub struct MartfitSurface {
    inner: CallSurface,
}

/// An interpolated call surface (opaque).
pub struct MartfitChain {
    inner: ExtremalSurface,
}

/// A path sampler with prebuilt per-interval barriers (opaque).
pub struct MartfitSampler {
    inner: SurfaceSampler,
}

/// Parse a marginal text document (`marginal <t>` / `atom <x> <w>` blocks)
/// into a surface handle. The handle owns its data; release it with
/// `martfit_surface_free`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn martfit_surface_parse(
    text: *const c_char,
    out: *mut *mut MartfitSurface,
) -> MartfitStatus {
    if text.is_null() || out.is_null() {
        return MartfitStatus::NullArgument;
    }
    let bytes = CStr::from_ptr(text);
    run(|| {
        let Ok(text) = bytes.to_str() else {
            set_error("input is not valid UTF-8");
            return MartfitStatus::Utf8;
        };
        match martfit::io::parse_marginals(text) {
            Ok(surface) => {
                *out = Box::into_raw(Box::new(MartfitSurface { inner: surface }));
                MartfitStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `surface` must come from `martfit_surface_parse` and not be used after.
#[no_mangle]
pub unsafe extern "C" fn martfit_surface_free(surface: *mut MartfitSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// `Ok` iff the surface satisfies the convex-order membership conditions;
/// `Invalid` with a descriptive message otherwise.
///
/// # Safety
/// `surface` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn martfit_surface_validate(surface: *const MartfitSurface) -> MartfitStatus {
    if surface.is_null() {
        return MartfitStatus::NullArgument;
    }
    let surface = &(*surface).inner;
    run(|| {
        let report = surface.validate_cp();
        if report.is_valid() {
            MartfitStatus::Ok
        } else {
            set_error(&report.to_string());
            MartfitStatus::Invalid
        }
    })
}

/// Number of grid times.
///
/// # Safety
/// `surface` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn martfit_surface_num_times(
    surface: *const MartfitSurface,
    out: *mut usize,
) -> MartfitStatus {
    if surface.is_null() || out.is_null() {
        return MartfitStatus::NullArgument;
    }
    *out = (*surface).inner.times().len();
    MartfitStatus::Ok
}

/// Copy the grid times into `buf` (capacity `cap`); `written` receives the
/// count, which is never more than `cap`.
///
/// # Safety
/// `buf` must point to at least `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn martfit_surface_times(
    surface: *const MartfitSurface,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> MartfitStatus {
    if surface.is_null() || buf.is_null() || written.is_null() {
        return MartfitStatus::NullArgument;
    }
    let times = (*surface).inner.times();
    let n = times.len().min(cap);
    std::ptr::copy_nonoverlapping(times.as_ptr(), buf, n);
    *written = n;
    MartfitStatus::Ok
}

/// Build the extremal interpolation of a valid surface.
///
/// # Safety
/// `surface` must be a live handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn martfit_chain_new(
    surface: *const MartfitSurface,
    out: *mut *mut MartfitChain,
) -> MartfitStatus {
    if surface.is_null() || out.is_null() {
        return MartfitStatus::NullArgument;
    }
    let surface = &(*surface).inner;
    run(|| match extremal_chain(surface) {
        Ok(chain) => {
            *out = Box::into_raw(Box::new(MartfitChain { inner: chain }));
            MartfitStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// # Safety
/// `chain` must come from `martfit_chain_new` and not be used after.
#[no_mangle]
pub unsafe extern "C" fn martfit_chain_free(chain: *mut MartfitChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Interpolated call value `C(t, x)`.
///
/// # Safety
/// `chain` must be a live handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn martfit_chain_eval(
    chain: *const MartfitChain,
    t: f64,
    x: f64,
    out: *mut f64,
) -> MartfitStatus {
    if chain.is_null() || out.is_null() {
        return MartfitStatus::NullArgument;
    }
    let chain = &(*chain).inner;
    run(|| match chain.eval(t, x) {
        Ok(v) => {
            *out = v;
            MartfitStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Distance between two interpolated surfaces within additive `tol`.
///
/// # Safety
/// Both handles must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn martfit_metric(
    a: *const MartfitChain,
    b: *const MartfitChain,
    tol: f64,
    out: *mut f64,
) -> MartfitStatus {
    if a.is_null() || b.is_null() || out.is_null() {
        return MartfitStatus::NullArgument;
    }
    if !(tol > 0.0) {
        set_error("tolerance must be positive");
        return MartfitStatus::Domain;
    }
    let (a, b) = (&(*a).inner, &(*b).inner);
    run(|| {
        *out = martfit::metric::metric_d(a, b, tol);
        MartfitStatus::Ok
    })
}

/// Build the path sampler (per-interval embedding barriers).
///
/// # Safety
/// `surface` must be a live handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn martfit_sampler_new(
    surface: *const MartfitSurface,
    out: *mut *mut MartfitSampler,
) -> MartfitStatus {
    if surface.is_null() || out.is_null() {
        return MartfitStatus::NullArgument;
    }
    let surface = &(*surface).inner;
    run(|| match SurfaceSampler::new(surface) {
        Ok(sampler) => {
            *out = Box::into_raw(Box::new(MartfitSampler { inner: sampler }));
            MartfitStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// # Safety
/// `sampler` must come from `martfit_sampler_new` and not be used after.
#[no_mangle]
pub unsafe extern "C" fn martfit_sampler_free(sampler: *mut MartfitSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Simulate `n_paths` paths at `n_times` query times; `out` receives the
/// row-major `n_paths x n_times` value matrix. Deterministic in `seed`.
///
/// # Safety
/// `times` must point to `n_times` doubles and `out` to
/// `n_paths * n_times` doubles.
#[no_mangle]
pub unsafe extern "C" fn martfit_sampler_simulate(
    sampler: *const MartfitSampler,
    n_paths: usize,
    seed: u64,
    times: *const f64,
    n_times: usize,
    out: *mut f64,
) -> MartfitStatus {
    if sampler.is_null() || times.is_null() || out.is_null() {
        return MartfitStatus::NullArgument;
    }
    let sampler = &(*sampler).inner;
    let times = std::slice::from_raw_parts(times, n_times);
    let out = std::slice::from_raw_parts_mut(out, n_paths * n_times);
    run(|| match sampler.simulate(n_paths, seed, times) {
        Ok(matrix) => {
            for (row, chunk) in matrix.iter().zip(out.chunks_exact_mut(n_times)) {
                chunk.copy_from_slice(row);
            }
            MartfitStatus::Ok
        }
        Err(e) => fail(e),
    })
}
