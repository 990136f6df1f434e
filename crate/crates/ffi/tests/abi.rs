use std::ffi::{c_char, CStr};
use std::path::Path;
use std::process::Command;
use std::ptr;

use grassmimo_ffi::*;

fn last_error() -> String {
    let len = gm_last_error_length();
    let mut buf = vec![0 as c_char; len + 1];
    let written = unsafe { gm_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(written as usize, len);
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_str()
        .unwrap()
        .to_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(gm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn volume_k1() {
    let mut out = 0.0;
    let st = unsafe { gm_volume(1, 4, 0.5, GmMetric::ProjectiveF, &mut out) };
    assert_eq!(st, GmStatus::Ok);
    assert!((out - 0.015625).abs() < 1e-15);
}

#[test]
fn unsupported_region_reports_code_and_message() {
    let mut out = -1.0;
    let st = unsafe { gm_volume(3, 8, 1.2, GmMetric::ProjectiveF, &mut out) };
    assert_eq!(st, GmStatus::Unsupported);
    assert_eq!(out, -1.0);
    assert!(last_error().contains("unsupported"));
}

#[test]
fn invalid_argument_and_null_output() {
    let mut out = 0.0;
    assert_eq!(
        unsafe { gm_beta(0, 3, &mut out) },
        GmStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { gm_beta(2, 3, ptr::null_mut()) },
        GmStatus::NullPointer
    );
    assert_eq!(unsafe { gm_beta(2, 3, &mut out) }, GmStatus::Ok);
    assert!((out - 1.0 / 12.0).abs() < 1e-15);
}

#[test]
fn short_error_buffer_is_refused() {
    let mut out = 0.0;
    unsafe { gm_beta(0, 0, &mut out) };
    let mut buf = [0 as c_char; 2];
    assert_eq!(
        unsafe { gm_last_error_message(buf.as_mut_ptr(), buf.len()) },
        -1
    );
    assert_eq!(unsafe { gm_last_error_message(ptr::null_mut(), 100) }, -1);
}

#[test]
fn incomplete_beta_family() {
    let mut a = 0.0;
    let mut b = 0.0;
    unsafe {
        assert_eq!(gm_incomplete_beta(0.5, 2, 3, &mut a), GmStatus::Ok);
        assert_eq!(
            gm_regularized_incomplete_beta(0.5, 2, 3, &mut b),
            GmStatus::Ok
        );
    }
    assert!((a - 0.05729166666666667).abs() < 1e-15);
    assert!((b - a * 12.0).abs() < 1e-14);
    unsafe {
        assert_eq!(
            gm_incomplete_beta_difference(0.5, 3, 3, &mut a),
            GmStatus::Ok
        )
    };
    assert_eq!(a, 0.0);
}

#[test]
fn sampled_points_and_distances() {
    unsafe {
        let rng = gm_rng_new(7, 0);
        let mut p: *mut GmPoint = ptr::null_mut();
        let mut q: *mut GmPoint = ptr::null_mut();
        assert_eq!(gm_point_sample(rng, 6, 2, &mut p), GmStatus::Ok);
        assert_eq!(gm_point_sample(rng, 6, 2, &mut q), GmStatus::Ok);
        assert_eq!((gm_point_n(p), gm_point_k(p)), (6, 2));

        let mut angles = [0.0; 2];
        let mut count = 0;
        assert_eq!(
            gm_canonical_angles(p, q, angles.as_mut_ptr(), 2, &mut count),
            GmStatus::Ok
        );
        assert_eq!(count, 2);

        let (mut pf, mut p2) = (0.0, 0.0);
        assert_eq!(gm_distance_pf(p, q, &mut pf), GmStatus::Ok);
        assert_eq!(gm_distance_p2(p, q, &mut p2), GmStatus::Ok);
        let s2: f64 = angles.iter().map(|t| t.sin().powi(2)).sum();
        assert!((pf - s2.sqrt()).abs() < 1e-12);
        assert!((p2 - angles.iter().map(|t| t.sin()).fold(0.0, f64::max)).abs() < 1e-12);

        let mut small = [0.0; 1];
        assert_eq!(
            gm_canonical_angles(p, q, small.as_mut_ptr(), 1, &mut count),
            GmStatus::BufferTooSmall
        );

        let mut re = [0.0; 12];
        let mut im = [0.0; 12];
        assert_eq!(
            gm_point_basis(p, re.as_mut_ptr(), im.as_mut_ptr(), 12),
            GmStatus::Ok
        );
        let mut p_copy: *mut GmPoint = ptr::null_mut();
        assert_eq!(
            gm_point_from_basis(6, 2, re.as_ptr(), im.as_ptr(), &mut p_copy),
            GmStatus::Ok
        );
        assert_eq!(gm_distance_pf(p, p_copy, &mut pf), GmStatus::Ok);
        assert!(pf < 1e-7);

        gm_point_free(p_copy);
        gm_point_free(p);
        gm_point_free(q);
        gm_rng_free(rng);
        gm_point_free(ptr::null_mut());
        gm_rng_free(ptr::null_mut());
    }
}

#[test]
fn same_seed_same_point() {
    unsafe {
        let (a, b) = (gm_rng_new(11, 3), gm_rng_new(11, 3));
        let mut p: *mut GmPoint = ptr::null_mut();
        let mut q: *mut GmPoint = ptr::null_mut();
        gm_point_sample(a, 5, 2, &mut p);
        gm_point_sample(b, 5, 2, &mut q);
        let (mut r1, mut i1, mut r2, mut i2) = ([0.0; 10], [0.0; 10], [0.0; 10], [0.0; 10]);
        gm_point_basis(p, r1.as_mut_ptr(), i1.as_mut_ptr(), 10);
        gm_point_basis(q, r2.as_mut_ptr(), i2.as_mut_ptr(), 10);
        assert_eq!((r1, i1), (r2, i2));
        gm_point_free(p);
        gm_point_free(q);
        gm_rng_free(a);
        gm_rng_free(b);
    }
}

#[test]
fn non_orthonormal_basis_rejected() {
    let re = [1.0, 0.0, 0.0, 1.0, 1.0, 0.0];
    let mut p: *mut GmPoint = ptr::null_mut();
    let st = unsafe { gm_point_from_basis(3, 2, re.as_ptr(), ptr::null(), &mut p) };
    assert_eq!(st, GmStatus::InvalidArgument);
    assert!(p.is_null());
}

#[test]
fn estimators() {
    let s = GmScenario {
        n_antennas: 100,
        n_users: 10,
        alpha: 1.0,
        sinr_su_db: 20.0,
    };
    let mut out = 0.0;
    unsafe {
        assert_eq!(gm_zf_ideal_expected(&s, &mut out), GmStatus::Ok);
        assert!((out - 9.1).abs() < 1e-12);
        assert_eq!(gm_estimate_cb_expected(&s, &mut out), GmStatus::Ok);
        assert!((out - 100.0 / 19.0).abs() < 1e-12);
        assert_eq!(gm_estimate_zf(1.5, &s, &mut out), GmStatus::InvalidArgument);
        assert_eq!(gm_estimate_zf(0.0, &s, &mut out), GmStatus::Ok);
        assert!((out - 10.0).abs() < 1e-12);
        assert_eq!(gm_gain_zf_cb(0.09, &s, &mut out), GmStatus::Ok);
        assert_eq!(gm_gain_zf_cb_asymptotic(&s, &mut out), GmStatus::Ok);
        assert_eq!(gm_zf_expected_lower_bound(&s, &mut out), GmStatus::Ok);
        assert_eq!(
            gm_zf_expected_lower_bound(ptr::null(), &mut out),
            GmStatus::NullPointer
        );
    }
    let bad = GmScenario { n_users: 200, ..s };
    assert_eq!(
        unsafe { gm_zf_ideal_expected(&bad, &mut out) },
        GmStatus::InvalidArgument
    );
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/grassmimo.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "gm_volume",
        "gm_point_free",
        "GM_STATUS_UNSUPPORTED",
        "typedef struct GmPoint GmPoint",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler; skipped syntax check");
        return;
    };
    assert!(status.success());
}
