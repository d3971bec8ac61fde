use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use radwave_ffi::*;

fn last_error() -> Option<String> {
    let p = rw_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn solver(n: u32, profile: RwProfile) -> *mut RwSolver {
    let mut h = ptr::null_mut();
    let s = unsafe { rw_solver_new(n, profile, 1.0, 1, 1, 1, &mut h) };
    assert_eq!(s, RwStatus::Ok, "{:?}", last_error());
    assert!(!h.is_null());
    h
}

#[test]
fn zero_data_evaluate_to_zero() {
    let h = solver(5, RwProfile::Zero);
    let mut v = f64::NAN;
    assert_eq!(unsafe { rw_solver_eval(h, 1.0, 10.0, 0, 0, &mut v) }, RwStatus::Ok);
    assert_eq!(v, 0.0);
    let mut n = 0;
    assert_eq!(unsafe { rw_solver_dimension(h, &mut n) }, RwStatus::Ok);
    assert_eq!(n, 5);
    unsafe { rw_solver_free(h) };
}

#[test]
fn handle_matches_library() {
    use num_rational::Rational64;
    use radwave::harness::{make_profile, ProfileKind};
    use radwave::riemann::Riemann;
    use radwave::{dim_params, Tolerances};

    let h = solver(4, RwProfile::Power);
    let d = dim_params(4).unwrap();
    let (phi, psi) = make_profile(ProfileKind::PowerEnvelope, 1.0, Rational64::from_integer(1), 1, d).unwrap();
    let op = Riemann::new(d, Tolerances::default()).unwrap();
    for (r, t, beta) in [(1.0, 3.0, [0, 0]), (2.0, 2.5, [1, 0]), (0.5, 4.0, [0, 1])] {
        let mut v = f64::NAN;
        let s = unsafe { rw_solver_eval(h, r, t, beta[0] as u32, beta[1] as u32, &mut v) };
        assert_eq!(s, RwStatus::Ok);
        assert_eq!(v, op.derivative(&phi, &psi, beta, r, t).unwrap().value);
    }
    unsafe { rw_solver_free(h) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { rw_solver_new(3, RwProfile::Zero, 1.0, 1, 1, 1, &mut h) }, RwStatus::InvalidParameter);
    assert!(h.is_null());
    assert!(last_error().unwrap().contains("dimension"));
    assert_eq!(unsafe { rw_solver_new(5, RwProfile::Power, 1.0, 1, 0, 1, &mut h) }, RwStatus::InvalidParameter);
    assert_eq!(unsafe { rw_solver_new(5, RwProfile::Power, 1.0, 1, 1, 1, ptr::null_mut()) }, RwStatus::NullPointer);

    let h = solver(5, RwProfile::Power);
    let mut v = 0.0;
    // |β| = 2 exceeds the smoothness l = 1.
    assert_eq!(unsafe { rw_solver_eval(h, 1.0, 2.0, 1, 1, &mut v) }, RwStatus::DerivativeOrder);
    assert_eq!(unsafe { rw_solver_eval(h, -1.0, 2.0, 0, 0, &mut v) }, RwStatus::Domain);
    assert_eq!(unsafe { rw_solver_eval(h, 1.0, 2.0, 0, 0, ptr::null_mut()) }, RwStatus::NullPointer);
    assert_eq!(unsafe { rw_solver_eval(ptr::null(), 1.0, 2.0, 0, 0, &mut v) }, RwStatus::NullPointer);
    // A success clears the message.
    assert_eq!(unsafe { rw_solver_eval(h, 1.0, 2.0, 0, 0, &mut v) }, RwStatus::Ok);
    assert!(last_error().is_none());
    unsafe { rw_solver_free(h) };
    unsafe { rw_solver_free(ptr::null_mut()) };
}

#[test]
fn bound_matches_library() {
    use num_rational::Rational64;
    use radwave::harness::{bound_expr, DecayBound};
    let d = radwave::dim_params(6).unwrap();
    let bd = DecayBound::theorem(d, Rational64::new(5, 2), 2, 1).unwrap();
    let mut v = 0.0;
    assert_eq!(unsafe { rw_decay_bound(6, 5, 2, 2, 1, 0.5, 3.0, 7.0, &mut v) }, RwStatus::Ok);
    assert_eq!(v, bound_expr(&bd, 0.5, 3.0, 7.0));
    assert_eq!(unsafe { rw_decay_bound(6, 5, 2, 3, 1, 0.5, 3.0, 7.0, &mut v) }, RwStatus::InvalidParameter);
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(rw_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/radwave.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["rw_solver_new", "rw_solver_free", "rw_solver_eval", "rw_decay_bound", "rw_last_error", "RW_STATUS_OK"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"radwave.h\"\nint main(void) { RwSolver *h = 0; double v; \
         RwStatus s = rw_solver_eval(h, 1.0, 2.0, 0, 0, &v); rw_solver_free(h); return s == RW_STATUS_OK; }\n",
    )
    .unwrap();
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; header syntax not checked");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
