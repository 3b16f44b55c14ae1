use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;
use std::sync::Arc;

use manifold_hermite::bhi::{bhi_build, DescentSettings};
use manifold_hermite::harness::experiment::sample;
use manifold_hermite::harness::plan::uniform_plan;
use manifold_hermite::harness::TestFunctionId;
use manifold_hermite::manifolds::ManifoldKind;
use manifold_hermite::thi::{thi_build, BaseRule};
use manifold_hermite_ffi::*;

struct Flat {
    k: usize,
    locations: Vec<f64>,
    points: Vec<f64>,
    derivatives: Vec<f64>,
}

fn gauss_samples() -> (manifold_hermite::bhi::HermiteSampleSet, Flat) {
    let q = std::f64::consts::FRAC_PI_4;
    let set = sample(TestFunctionId::GaussMap, uniform_plan(-q, q, 3, 2).unwrap()).unwrap();
    let mut flat = Flat {
        k: set.len(),
        locations: Vec::new(),
        points: Vec::new(),
        derivatives: Vec::new(),
    };
    for j in 0..set.len() {
        flat.locations.extend_from_slice(set.plan().location(j));
        flat.points.extend_from_slice(set.points()[j].coords());
        for i in 0..2 {
            flat.derivatives
                .extend_from_slice(set.derivative(j, i).coords());
        }
    }
    (set, flat)
}

const THETA: [f64; 2] = [0.5, 0.5];

fn last_error() -> String {
    unsafe { CStr::from_ptr(mh_last_error()) }
        .to_string_lossy()
        .into_owned()
}

unsafe fn build_bhi(f: &Flat, descent: *const MhDescent) -> (MhStatus, *mut MhBhi) {
    let mut h = ptr::null_mut();
    let s = mh_bhi_build(
        MhManifold::Sphere,
        0,
        f.k,
        2,
        f.locations.as_ptr(),
        f.points.as_ptr(),
        f.derivatives.as_ptr(),
        THETA.as_ptr(),
        descent,
        &mut h,
    );
    (s, h)
}

unsafe fn build_thi(f: &Flat, base: i64) -> (MhStatus, *mut MhThi) {
    let mut h = ptr::null_mut();
    let s = mh_thi_build(
        MhManifold::Sphere,
        0,
        f.k,
        2,
        f.locations.as_ptr(),
        f.points.as_ptr(),
        f.derivatives.as_ptr(),
        THETA.as_ptr(),
        base,
        1e-4,
        ptr::null(),
        &mut h,
    );
    (s, h)
}

#[test]
fn handles_match_the_library() {
    let (set, flat) = gauss_samples();
    let sphere = ManifoldKind::Sphere.instantiate();
    let mut direct_bhi = bhi_build(
        set.clone(),
        Arc::clone(&sphere),
        &THETA,
        DescentSettings::default(),
    )
    .unwrap();
    let direct_thi = thi_build(
        &set,
        sphere,
        BaseRule::Barycenter,
        &THETA,
        1e-4,
        &DescentSettings::default(),
    )
    .unwrap();
    unsafe {
        let (s, bhi) = build_bhi(&flat, ptr::null());
        assert_eq!(s, MhStatus::Ok);
        let (s, thi) = build_thi(&flat, -1);
        assert_eq!(s, MhStatus::Ok);
        assert_eq!(mh_bhi_ambient_dim(bhi), 3);
        assert_eq!(mh_thi_ambient_dim(thi), 3);

        let mut out = [0.0; 3];
        let mut iters = 0usize;
        for w in [[0.1, -0.2], [0.3, 0.35], [-0.7, 0.0]] {
            assert_eq!(
                mh_bhi_query(bhi, w.as_ptr(), 2, out.as_mut_ptr(), 3, &mut iters),
                MhStatus::Ok
            );
            assert_eq!(out.as_slice(), direct_bhi.query(&w).unwrap().coords());
            assert!(iters > 0);
            assert_eq!(
                mh_bhi_query_stateless(bhi, w.as_ptr(), 2, out.as_mut_ptr(), 3, ptr::null_mut()),
                MhStatus::Ok
            );
            assert_eq!(
                out.as_slice(),
                direct_bhi.query_stateless(&w).unwrap().coords()
            );
            assert_eq!(
                mh_thi_query(thi, w.as_ptr(), 2, out.as_mut_ptr(), 3),
                MhStatus::Ok
            );
            assert_eq!(out.as_slice(), direct_thi.query(&w).unwrap().coords());
        }
        mh_bhi_free(bhi);
        mh_thi_free(thi);
    }
}

#[test]
fn base_sample_index_selects_the_base() {
    let (_, flat) = gauss_samples();
    unsafe {
        let (s, first) = build_thi(&flat, 0);
        assert_eq!(s, MhStatus::Ok);
        let (s, _) = build_thi(&flat, 9);
        assert_eq!(s, MhStatus::InvalidInput);
        assert!(last_error().contains("out of range"), "{}", last_error());
        mh_thi_free(first);
    }
}

#[test]
fn failures_report_status_and_message() {
    let (_, flat) = gauss_samples();
    unsafe {
        let mut out = [0.0; 3];
        let w = [0.0, 0.0];

        assert_eq!(
            mh_thi_query(ptr::null(), w.as_ptr(), 2, out.as_mut_ptr(), 3),
            MhStatus::NullPointer
        );
        assert!(last_error().contains("model"));

        let mut h = ptr::null_mut();
        let s = mh_bhi_build(
            MhManifold::Sphere,
            0,
            flat.k,
            2,
            flat.locations.as_ptr(),
            ptr::null(),
            flat.derivatives.as_ptr(),
            THETA.as_ptr(),
            ptr::null(),
            &mut h,
        );
        assert_eq!(s, MhStatus::NullPointer);
        assert!(h.is_null());
        assert!(last_error().contains("points"));

        let mut off = flat.points.clone();
        off[0] *= 1.5;
        let s = mh_bhi_build(
            MhManifold::Sphere,
            0,
            flat.k,
            2,
            flat.locations.as_ptr(),
            off.as_ptr(),
            flat.derivatives.as_ptr(),
            THETA.as_ptr(),
            ptr::null(),
            &mut h,
        );
        assert_eq!(s, MhStatus::InvalidInput);

        let s = mh_bhi_build(
            MhManifold::Euclidean,
            0,
            flat.k,
            2,
            flat.locations.as_ptr(),
            flat.points.as_ptr(),
            flat.derivatives.as_ptr(),
            THETA.as_ptr(),
            ptr::null(),
            &mut h,
        );
        assert_eq!(s, MhStatus::InvalidInput);

        let (s, bhi) = build_bhi(&flat, ptr::null());
        assert_eq!(s, MhStatus::Ok);
        assert_eq!(
            mh_bhi_query(bhi, w.as_ptr(), 2, out.as_mut_ptr(), 2, ptr::null_mut()),
            MhStatus::InvalidInput
        );
        assert!(last_error().contains("need 3"));
        mh_bhi_free(bhi);

        let stuck = MhDescent {
            step: 1.0,
            tolerance: 0.0,
            max_iterations: 1,
        };
        let (s, bhi) = build_bhi(&flat, &stuck);
        assert_eq!(s, MhStatus::Ok);
        assert_eq!(
            mh_bhi_query_stateless(
                bhi,
                [0.1, 0.2].as_ptr(),
                2,
                out.as_mut_ptr(),
                3,
                ptr::null_mut()
            ),
            MhStatus::NonConvergence
        );
        mh_bhi_free(bhi);

        mh_bhi_free(ptr::null_mut());
        mh_thi_free(ptr::null_mut());
        assert_eq!(mh_bhi_ambient_dim(ptr::null()), 0);
    }
}

#[test]
fn last_error_is_per_thread() {
    unsafe {
        assert_eq!(
            mh_thi_query(ptr::null(), ptr::null(), 0, ptr::null_mut(), 0),
            MhStatus::NullPointer
        );
    }
    let other = std::thread::spawn(last_error).join().unwrap();
    assert_eq!(other, "");
    assert!(!last_error().is_empty());
}

#[test]
fn version_and_defaults() {
    let v = unsafe { CStr::from_ptr(mh_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    let d = mh_descent_default();
    let s = DescentSettings::default();
    assert_eq!(
        (d.step, d.tolerance, d.max_iterations),
        (s.step, s.tolerance, s.max_iterations)
    );
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/manifold_hermite.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "mh_bhi_build",
        "mh_bhi_query",
        "mh_bhi_query_stateless",
        "mh_bhi_ambient_dim",
        "mh_bhi_free",
        "mh_thi_build",
        "mh_thi_query",
        "mh_thi_ambient_dim",
        "mh_thi_free",
        "mh_last_error",
        "mh_version",
        "mh_descent_default",
        "typedef struct MhBhi MhBhi",
        "typedef struct MhThi MhThi",
        "MH_STATUS_NON_CONVERGENCE = 5",
    ] {
        assert!(text.contains(name), "{name}");
    }
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "manifold_hermite.h"

int main(void) {
    /* unit circle arc in R^2 as a flat-space curve: points and tangents */
    double loc[3] = {0.0, 0.5, 1.0}, pts[6], der[6], theta[1] = {0.5};
    for (int j = 0; j < 3; ++j) {
        pts[2 * j] = cos(loc[j]); pts[2 * j + 1] = sin(loc[j]);
        der[2 * j] = -sin(loc[j]); der[2 * j + 1] = cos(loc[j]);
    }
    MhThi *thi = NULL;
    if (mh_thi_build(MH_MANIFOLD_EUCLIDEAN, 2, 3, 1, loc, pts, der, theta, 0, 1e-4, NULL, &thi) != MH_STATUS_OK) {
        fprintf(stderr, "%s\n", mh_last_error());
        return 1;
    }
    double w = 0.5, out[2];
    if (mh_thi_query(thi, &w, 1, out, 2) != MH_STATUS_OK) return 2;
    if (fabs(out[0] - cos(0.5)) > 1e-9 || fabs(out[1] - sin(0.5)) > 1e-9) return 3;
    if (mh_thi_query(NULL, &w, 1, out, 2) != MH_STATUS_NULL_POINTER) return 4;
    mh_thi_free(thi);
    printf("%s\n", mh_version());
    return 0;
}
"#;

/// Compiles and runs a C client against the header and static library when
/// a C compiler is available.
#[test]
fn c_client_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libmanifold_hermite_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let tmp = tempfile::TempDir::new().unwrap();
    let src = tmp.path().join("client.c");
    let bin = tmp.path().join("client");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C client failed to compile");
    let out = Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "client exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        env!("CARGO_PKG_VERSION")
    );
}
