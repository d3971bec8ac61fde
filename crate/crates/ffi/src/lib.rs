//! C ABI over the radwave library. Solvers are opaque heap handles; every
//! call returns an `RwStatus` and writes results through out-pointers. The
//! message of the last failure on the calling thread is available from
//! `rw_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_rational::Rational64;
use radwave::harness::{bound_expr, make_profile, DecayBound, ProfileKind};
use radwave::riemann::{RadialProfile, Riemann};
use radwave::{dim_params, Error, Tolerances};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    Pole = 4,
    DerivativeOrder = 5,
    Quadrature = 6,
    Profile = 7,
    Grid = 8,
    Panic = 9,
}

/// Data profile families.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RwProfile {
    /// Power-law data saturating the envelope.
    Power = 0,
    /// A smooth bump on `[1, 2]`.
    Compact = 1,
    /// Zero data.
    Zero = 2,
}

/// Opaque solver: the Riemann operator for one dimension and a data pair.
pub struct RwSolver {
    op: Riemann,
    phi: RadialProfile,
    psi: RadialProfile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RwStatus {
    match e {
        Error::InvalidParameter(_) => RwStatus::InvalidParameter,
        Error::Domain(_) => RwStatus::Domain,
        Error::Pole(_) => RwStatus::Pole,
        Error::DerivativeOrder { .. } => RwStatus::DerivativeOrder,
        Error::Quadrature { .. } => RwStatus::Quadrature,
        Error::Profile(_) => RwStatus::Profile,
        Error::Grid(_) => RwStatus::Grid,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard<F>(f: F) -> RwStatus
where
    F: FnOnce() -> Result<(), (RwStatus, String)>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RwStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RwStatus::Panic
        }
    }
}

fn lib(e: Error) -> (RwStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RwStatus, String) {
    (RwStatus::NullPointer, format!("{what} is null"))
}

fn rational(num: i64, den: i64) -> Result<Rational64, (RwStatus, String)> {
    if den <= 0 {
        return Err((RwStatus::InvalidParameter, format!("denominator must be positive, got {den}")));
    }
    Ok(Rational64::new(num, den))
}

/// Creates a solver for dimension `n` with data of the given family
/// matched to the envelope `(eps, k_num/k_den, l)`. The envelope is
/// ignored for zero data. Free the handle with `rw_solver_free`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rw_solver_new(
    n: u32,
    profile: RwProfile,
    eps: f64,
    k_num: i64,
    k_den: i64,
    l: u32,
    out: *mut *mut RwSolver,
) -> RwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let dims = dim_params(n).map_err(lib)?;
        let (phi, psi) = match profile {
            RwProfile::Zero => (RadialProfile::zero(), RadialProfile::zero()),
            RwProfile::Power | RwProfile::Compact => {
                let kind = if profile == RwProfile::Power {
                    ProfileKind::PowerEnvelope
                } else {
                    ProfileKind::CompactBump
                };
                make_profile(kind, eps, rational(k_num, k_den)?, l, dims).map_err(lib)?
            }
        };
        let op = Riemann::new(dims, Tolerances::default()).map_err(lib)?;
        let handle = Box::new(RwSolver { op, phi, psi });
        // SAFETY: `out` is non-null and the caller guarantees it is writable.
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// Releases a solver. Null is accepted.
///
/// # Safety
/// `solver` must be null or a handle from `rw_solver_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rw_solver_free(solver: *mut RwSolver) {
    if !solver.is_null() {
        // SAFETY: the handle came from `Box::into_raw` and is freed once.
        drop(unsafe { Box::from_raw(solver) });
    }
}

/// Space dimension of a solver.
///
/// # Safety
/// `solver` must be a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rw_solver_dimension(solver: *const RwSolver, out: *mut u32) -> RwStatus {
    guard(|| {
        // SAFETY: checked for null; liveness is the caller's contract.
        let s = unsafe { solver.as_ref() }.ok_or_else(|| null("solver"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: non-null and writable by contract.
        unsafe { *out = s.op.dims().n() };
        Ok(())
    })
}

/// `∂_r^{beta_r} ∂_t^{beta_t} u0(r, t)`.
///
/// # Safety
/// `solver` must be a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rw_solver_eval(
    solver: *const RwSolver,
    r: f64,
    t: f64,
    beta_r: u32,
    beta_t: u32,
    out: *mut f64,
) -> RwStatus {
    guard(|| {
        // SAFETY: checked for null; liveness is the caller's contract.
        let s = unsafe { solver.as_ref() }.ok_or_else(|| null("solver"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let beta = [beta_r as usize, beta_t as usize];
        let v = s.op.derivative(&s.phi, &s.psi, beta, r, t).map_err(lib)?.value;
        // SAFETY: non-null and writable by contract.
        unsafe { *out = v };
        Ok(())
    })
}

/// Majorant of `|D^β u0|` selected by `k = k_num/k_den` against
/// `(n − 1)/2`, evaluated at `(r, t)` with `|β| = beta`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rw_decay_bound(
    n: u32,
    k_num: i64,
    k_den: i64,
    l: u32,
    beta: u32,
    eps: f64,
    r: f64,
    t: f64,
    out: *mut f64,
) -> RwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let dims = dim_params(n).map_err(lib)?;
        let bd = DecayBound::theorem(dims, rational(k_num, k_den)?, l, beta).map_err(lib)?;
        // SAFETY: non-null and writable by contract.
        unsafe { *out = bound_expr(&bd, eps, r, t) };
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null after a
/// success. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn rw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rw_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"unknown",
    };
    VERSION.as_ptr()
}
