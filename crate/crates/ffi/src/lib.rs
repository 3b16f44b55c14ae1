//! C ABI for the `manifold-hermite` interpolation library.
//!
//! Models are opaque handles created by `mh_*_build` and released with
//! `mh_*_free`. Every fallible call returns an [`MhStatus`]; on failure the
//! message is available from [`mh_last_error`] on the calling thread.
//!
//! Array layouts (all row-major, `N` the ambient dimension of the manifold):
//!
//! - `locations`: `k x d`
//! - `points`: `k x N` (rotations as row-major 3x3 matrices, `N = 9`)
//! - `derivatives`: `k x d x N`, entry `(j, i)` is the partial derivative along
//!   parameter axis `i` at sample `j`

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use manifold_hermite::bhi::{bhi_build, BhiModel, DescentSettings, HermiteSampleSet};
use manifold_hermite::gek::SamplePlan;
use manifold_hermite::manifold::Manifold;
use manifold_hermite::manifolds::ManifoldKind;
use manifold_hermite::thi::{thi_build, BaseRule, ThiModel};
use manifold_hermite::Error;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad shapes, parameters, or points/vectors off the manifold.
    InvalidInput = 2,
    /// A logarithm was requested outside its domain.
    Domain = 3,
    /// The samples cannot support the interpolant (span, sum constraint or
    /// Kriging factorization failure).
    DegenerateData = 4,
    /// Barycenter descent did not converge.
    NonConvergence = 5,
    /// Internal error; the library caught a panic.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhManifold {
    Sphere = 0,
    So3 = 1,
    /// Needs the dimension argument of the build call.
    Euclidean = 2,
}

/// Descent parameters for barycenter computations.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MhDescent {
    pub step: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

/// Opaque barycentric Hermite interpolant.
pub struct MhBhi {
    model: BhiModel,
}

/// Opaque tangent-space Hermite interpolant.
pub struct MhThi {
    model: ThiModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MhStatus {
    match e {
        Error::InvalidInput(_) | Error::Tangency { .. } | Error::NotOnManifold { .. } => {
            MhStatus::InvalidInput
        }
        Error::Domain(_) | Error::Antipodal { .. } => MhStatus::Domain,
        Error::Span { .. } | Error::DegenerateConstraint { .. } | Error::Conditioning { .. } => {
            MhStatus::DegenerateData
        }
        Error::NonConvergence { .. } => MhStatus::NonConvergence,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> MhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MhStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            MhStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            MhStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or valid for `len` reads.
unsafe fn input<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn manifold_of(kind: MhManifold, euclidean_dim: usize) -> Result<Arc<dyn Manifold>, Failure> {
    Ok(match kind {
        MhManifold::Sphere => ManifoldKind::Sphere.instantiate(),
        MhManifold::So3 => ManifoldKind::So3.instantiate(),
        MhManifold::Euclidean if euclidean_dim > 0 => {
            ManifoldKind::Euclidean(euclidean_dim).instantiate()
        }
        MhManifold::Euclidean => {
            return Err(Error::InvalidInput("euclidean dimension must be positive".into()).into())
        }
    })
}

struct Inputs {
    manifold: Arc<dyn Manifold>,
    samples: HermiteSampleSet,
    theta: Vec<f64>,
}

/// # Safety
/// Pointers follow the layouts in the crate docs.
#[allow(clippy::too_many_arguments)]
unsafe fn read_inputs(
    kind: MhManifold,
    euclidean_dim: usize,
    k: usize,
    d: usize,
    locations: *const f64,
    points: *const f64,
    derivatives: *const f64,
    theta: *const f64,
) -> Result<Inputs, Failure> {
    let manifold = manifold_of(kind, euclidean_dim)?;
    if k == 0 || d == 0 {
        return Err(
            Error::InvalidInput(format!("need k > 0 and d > 0, got k = {k}, d = {d}")).into(),
        );
    }
    let n = manifold.ambient_dim();
    let locs = input(locations, k * d, "locations")?;
    let pts = input(points, k * n, "points")?;
    let ders = input(derivatives, k * d * n, "derivatives")?;
    let theta = input(theta, d, "theta")?.to_vec();
    let plan = SamplePlan::new(locs.chunks_exact(d).map(<[f64]>::to_vec).collect())?;
    let samples = HermiteSampleSet::from_coords(
        manifold.as_ref(),
        plan,
        pts.chunks_exact(n).map(<[f64]>::to_vec).collect(),
        ders.chunks_exact(d * n)
            .map(|row| row.chunks_exact(n).map(<[f64]>::to_vec).collect())
            .collect(),
    )?;
    Ok(Inputs {
        manifold,
        samples,
        theta,
    })
}

fn settings(d: &MhDescent) -> DescentSettings {
    DescentSettings {
        step: d.step,
        tolerance: d.tolerance,
        max_iterations: d.max_iterations,
    }
}

/// Default descent parameters (unit step, tolerance 1e-8, 500 iterations).
#[no_mangle]
pub extern "C" fn mh_descent_default() -> MhDescent {
    let s = DescentSettings::default();
    MhDescent {
        step: s.step,
        tolerance: s.tolerance,
        max_iterations: s.max_iterations,
    }
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mh_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version has no interior NUL"),
        };
    VERSION.as_ptr()
}

/// Builds a BHI model. `euclidean_dim` is ignored unless `manifold` is
/// `MH_MANIFOLD_EUCLIDEAN`. `descent` may be null for the defaults.
///
/// # Safety
/// Pointers follow the layouts in the crate docs; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn mh_bhi_build(
    manifold: MhManifold,
    euclidean_dim: usize,
    k: usize,
    d: usize,
    locations: *const f64,
    points: *const f64,
    derivatives: *const f64,
    theta: *const f64,
    descent: *const MhDescent,
    out: *mut *mut MhBhi,
) -> MhStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = ptr::null_mut();
        let inputs = read_inputs(
            manifold,
            euclidean_dim,
            k,
            d,
            locations,
            points,
            derivatives,
            theta,
        )?;
        let s = descent.as_ref().map(settings).unwrap_or_default();
        let model = bhi_build(inputs.samples, inputs.manifold, &inputs.theta, s)?;
        *out = Box::into_raw(Box::new(MhBhi { model }));
        Ok(())
    })
}

enum BhiHandle {
    Warm(*mut MhBhi),
    Stateless(*const MhBhi),
}

/// # Safety
/// The handle is null or was returned by [`mh_bhi_build`]; `out` holds
/// `out_len` doubles; `iterations` may be null.
unsafe fn bhi_query_impl(
    handle: BhiHandle,
    omega: *const f64,
    d: usize,
    out: *mut f64,
    out_len: usize,
    iterations: *mut usize,
) -> MhStatus {
    guard(|| {
        let omega = input(omega, d, "omega")?;
        let n = match &handle {
            BhiHandle::Warm(m) => m.as_ref().map(|m| m.model.manifold().ambient_dim()),
            BhiHandle::Stateless(m) => m.as_ref().map(|m| m.model.manifold().ambient_dim()),
        }
        .ok_or(Failure::Null("model"))?;
        if out_len != n {
            return Err(
                Error::InvalidInput(format!("output holds {out_len} values, need {n}")).into(),
            );
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let outcome = match handle {
            BhiHandle::Warm(m) => (*m).model.query_detailed(omega)?,
            BhiHandle::Stateless(m) => (*m).model.query_stateless_detailed(omega)?,
        };
        slice::from_raw_parts_mut(out, n).copy_from_slice(outcome.point.coords());
        if !iterations.is_null() {
            *iterations = outcome.iterations;
        }
        Ok(())
    })
}

/// Evaluates the BHI interpolant, warm-started from the previous result.
/// Not safe to call concurrently on one handle.
///
/// # Safety
/// `model` comes from [`mh_bhi_build`]; `omega` holds `d` doubles, `out`
/// holds `out_len` doubles; `iterations` may be null.
#[no_mangle]
pub unsafe extern "C" fn mh_bhi_query(
    model: *mut MhBhi,
    omega: *const f64,
    d: usize,
    out: *mut f64,
    out_len: usize,
    iterations: *mut usize,
) -> MhStatus {
    bhi_query_impl(BhiHandle::Warm(model), omega, d, out, out_len, iterations)
}

/// Evaluates the BHI interpolant from the fixed initial guess. Safe to call
/// concurrently on one handle.
///
/// # Safety
/// As for [`mh_bhi_query`].
#[no_mangle]
pub unsafe extern "C" fn mh_bhi_query_stateless(
    model: *const MhBhi,
    omega: *const f64,
    d: usize,
    out: *mut f64,
    out_len: usize,
    iterations: *mut usize,
) -> MhStatus {
    bhi_query_impl(
        BhiHandle::Stateless(model),
        omega,
        d,
        out,
        out_len,
        iterations,
    )
}

/// Ambient dimension of the model's points, or 0 for a null handle.
///
/// # Safety
/// `model` is null or comes from [`mh_bhi_build`].
#[no_mangle]
pub unsafe extern "C" fn mh_bhi_ambient_dim(model: *const MhBhi) -> usize {
    model
        .as_ref()
        .map_or(0, |m| m.model.manifold().ambient_dim())
}

/// # Safety
/// `model` is null or comes from [`mh_bhi_build`] and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mh_bhi_free(model: *mut MhBhi) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Builds a THI model. `base_sample` selects the tangent-space base point:
/// a negative value uses the Riemannian barycenter of the samples, otherwise
/// the zero-based sample index. `dt` is the finite-difference step for moving
/// derivatives into the base tangent space. `descent` may be null.
///
/// # Safety
/// As for [`mh_bhi_build`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn mh_thi_build(
    manifold: MhManifold,
    euclidean_dim: usize,
    k: usize,
    d: usize,
    locations: *const f64,
    points: *const f64,
    derivatives: *const f64,
    theta: *const f64,
    base_sample: i64,
    dt: f64,
    descent: *const MhDescent,
    out: *mut *mut MhThi,
) -> MhStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = ptr::null_mut();
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")).into());
        }
        let inputs = read_inputs(
            manifold,
            euclidean_dim,
            k,
            d,
            locations,
            points,
            derivatives,
            theta,
        )?;
        let rule = match usize::try_from(base_sample) {
            Ok(j) => BaseRule::SampleIndex(j),
            Err(_) => BaseRule::Barycenter,
        };
        let s = descent.as_ref().map(settings).unwrap_or_default();
        let model = thi_build(
            &inputs.samples,
            inputs.manifold,
            rule,
            &inputs.theta,
            dt,
            &s,
        )?;
        *out = Box::into_raw(Box::new(MhThi { model }));
        Ok(())
    })
}

/// Evaluates the THI interpolant. Safe to call concurrently on one handle.
///
/// # Safety
/// `model` comes from [`mh_thi_build`]; `omega` holds `d` doubles, `out`
/// holds `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mh_thi_query(
    model: *const MhThi,
    omega: *const f64,
    d: usize,
    out: *mut f64,
    out_len: usize,
) -> MhStatus {
    guard(|| {
        let model = &model.as_ref().ok_or(Failure::Null("model"))?.model;
        let omega = input(omega, d, "omega")?;
        let n = model.manifold().ambient_dim();
        if out_len != n {
            return Err(
                Error::InvalidInput(format!("output holds {out_len} values, need {n}")).into(),
            );
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let p = model.query(omega)?;
        slice::from_raw_parts_mut(out, n).copy_from_slice(p.coords());
        Ok(())
    })
}

/// # Safety
/// `model` is null or comes from [`mh_thi_build`].
#[no_mangle]
pub unsafe extern "C" fn mh_thi_ambient_dim(model: *const MhThi) -> usize {
    model
        .as_ref()
        .map_or(0, |m| m.model.manifold().ambient_dim())
}

/// # Safety
/// `model` is null or comes from [`mh_thi_build`] and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mh_thi_free(model: *mut MhThi) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
