//! C ABI over `trapping_lab`: opaque handles, status codes and a
//! thread-local last-error message.
//!
//! Every function returns a [`TlStatus`]; outputs go through pointer
//! arguments. Handles are released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use trapping_lab::classical::{sample_trapped_set, ClassicalParams, Trapping, TrappingReport};
use trapping_lab::potentials::PotentialSpec;
use trapping_lab::quantum::{build_operator, BumpSpec, CapSpec, DiscreteOperator, GridSpec};
use trapping_lab::resolvent::{estimate_norm, sweep, NormOptions, SweepOptions, ZSweep};
use trapping_lab::scaling::{classify, Model, ScalingSeries};
use trapping_lab::LabError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlModel {
    PowerLaw = 0,
    LogEnhanced = 1,
    Exponential = 2,
}

/// Potential profile.
pub struct TlPotential(PotentialSpec);

/// Result of a classical trapped-set scan.
pub struct TlReport(TrappingReport);

/// Discretized operator with its cutoff and absorbing potential.
pub struct TlOperator(DiscreteOperator);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &LabError) -> TlStatus {
    match e {
        LabError::Usage(_) => TlStatus::InvalidArgument,
        LabError::Integration { .. } | LabError::SingularPivot { .. } | LabError::FilterDegree { .. } => {
            TlStatus::Numerical
        }
        _ => TlStatus::Config,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), (TlStatus, String)>) -> TlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            TlStatus::Panic
        }
    }
}

fn lab<T>(r: trapping_lab::Result<T>) -> Result<T, (TlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (TlStatus, String) {
    (TlStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (TlStatus, String) {
    (TlStatus::InvalidArgument, msg.into())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (TlStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), (TlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], (TlStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes, excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a potential from a family name (`"Zero"`, `"AttractiveBump"`,
/// `"EckartBarrier"`, `"DoubleBarrier"`) and `count` named parameters.
/// A non-positive `sigma` selects the family default.
///
/// # Safety
/// `family` and each `names[i]` must be NUL-terminated strings; `names` and
/// `values` must hold `count` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_potential_new(
    family: *const c_char,
    names: *const *const c_char,
    values: *const f64,
    count: usize,
    sigma: f64,
    out: *mut *mut TlPotential,
) -> TlStatus {
    guard(|| {
        let family = text(family, "family")?;
        let names = slice(names, count, "names")?;
        let values = slice(values, count, "values")?;
        let keys = names.iter().map(|&n| text(n, "parameter name")).collect::<Result<Vec<_>, _>>()?;
        let params: Vec<(&str, f64)> = keys.into_iter().zip(values.iter().copied()).collect();
        let spec = lab(PotentialSpec::from_named(family, &params, (sigma > 0.0).then_some(sigma)))?;
        write(out, Box::into_raw(Box::new(TlPotential(spec))), "out")
    })
}

/// # Safety
/// `p` must be null or a handle from [`tl_potential_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tl_potential_free(p: *mut TlPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `V(x)` (`order` 0), `V'(x)` (1) or `V''(x)` (2).
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_potential_eval(p: *const TlPotential, x: f64, order: u32, out: *mut f64) -> TlStatus {
    guard(|| {
        let spec = &deref(p, "potential")?.0;
        let v = match order {
            0 => spec.value(x),
            1 => spec.d1(x),
            2 => spec.d2(x),
            _ => return Err(invalid(format!("derivative order {order} not supported"))),
        };
        write(out, v, "out")
    })
}

/// Classical trapped-set scan at energy `e0` with default settings.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_classify(p: *const TlPotential, e0: f64, out: *mut *mut TlReport) -> TlStatus {
    guard(|| {
        let spec = &deref(p, "potential")?.0;
        let report = lab(sample_trapped_set(spec, e0, &ClassicalParams::default()))?;
        write(out, Box::into_raw(Box::new(TlReport(report))), "out")
    })
}

/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn tl_report_free(r: *mut TlReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Writes 1 for a trapping energy, 0 otherwise.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_report_is_trapping(r: *const TlReport, out: *mut i32) -> TlStatus {
    guard(|| {
        let report = &deref(r, "report")?.0;
        write(out, (report.classification == Trapping::Trapping) as i32, "out")
    })
}

/// Stability rate of the trapped set; `InvalidArgument` when nothing is trapped.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_report_gamma(r: *const TlReport, out: *mut f64) -> TlStatus {
    guard(|| {
        let report = &deref(r, "report")?.0;
        let g = report.gamma.ok_or_else(|| invalid("no trapped set at this energy"))?;
        write(out, g, "out")
    })
}

/// Spatial hull `[lo, hi]` of the trapped samples; `InvalidArgument` when nothing is trapped.
///
/// # Safety
/// `r` must be a live handle and `lo`, `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_report_hull(r: *const TlReport, lo: *mut f64, hi: *mut f64) -> TlStatus {
    guard(|| {
        let report = &deref(r, "report")?.0;
        let (a, b) = report.spatial_hull.ok_or_else(|| invalid("no trapped set at this energy"))?;
        write(lo, a, "lo")?;
        write(hi, b, "hi")
    })
}

/// Builds the operator on `[-half_width, half_width]` resolving energies up
/// to `max_energy`, with absorbing ramp from `r_a` of strength `eta` and a
/// symmetric cutoff of plateau radius `chi_radius` and ramp width `chi_ramp`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_operator_new(
    p: *const TlPotential,
    half_width: f64,
    h: f64,
    max_energy: f64,
    points_per_wavelength: f64,
    r_a: f64,
    eta: f64,
    chi_radius: f64,
    chi_ramp: f64,
    out: *mut *mut TlOperator,
) -> TlStatus {
    guard(|| {
        let spec = &deref(p, "potential")?.0;
        let grid = lab(GridSpec::resolved(half_width, h, max_energy, points_per_wavelength))?;
        let chi = lab(BumpSpec::symmetric(chi_radius, chi_ramp))?;
        let op = lab(build_operator(&grid, spec, CapSpec { r_a, eta }, chi))?;
        write(out, Box::into_raw(Box::new(TlOperator(op))), "out")
    })
}

/// # Safety
/// `op` must be null or a live operator handle.
#[no_mangle]
pub unsafe extern "C" fn tl_operator_free(op: *mut TlOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Number of grid points.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_operator_len(op: *const TlOperator, out: *mut usize) -> TlStatus {
    guard(|| write(out, deref(op, "operator")?.0.len(), "out"))
}

/// `||chi (P - z - iW)^{-1} chi||`; `converged` receives 0 when the iteration cap was hit.
///
/// # Safety
/// `op` must be a live handle; `norm` and `converged` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_estimate_norm(
    op: *const TlOperator,
    z: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
    norm: *mut f64,
    converged: *mut i32,
) -> TlStatus {
    guard(|| {
        let op = &deref(op, "operator")?.0;
        let opts = NormOptions { tol, max_iter, seed, ..NormOptions::default() };
        let s = lab(estimate_norm(op, z, &opts))?;
        write(norm, s.norm, "norm")?;
        write(converged, s.converged as i32, "converged")
    })
}

/// Sweep of `count` energies on `[e0 - eps, e0 + eps]` with refinement; writes
/// the sup of the norm, `K = h sup`, its location, and 1 in `lower_bound_only`
/// when some sample did not converge.
///
/// # Safety
/// `op` must be a live handle; all outputs writable.
#[no_mangle]
pub unsafe extern "C" fn tl_sweep(
    op: *const TlOperator,
    e0: f64,
    eps: f64,
    count: usize,
    tol: f64,
    sup_norm: *mut f64,
    k: *mut f64,
    argmax_z: *mut f64,
    lower_bound_only: *mut i32,
) -> TlStatus {
    guard(|| {
        let op = &deref(op, "operator")?.0;
        let zs = lab(ZSweep::new(e0, eps, count))?;
        let opts = SweepOptions { norm: NormOptions { tol, ..NormOptions::default() }, ..SweepOptions::default() };
        let r = lab(sweep(op, &zs, &opts))?;
        write(sup_norm, r.kofh.sup_norm, "sup_norm")?;
        write(k, r.kofh.k, "k")?;
        write(argmax_z, r.kofh.argmax_z, "argmax_z")?;
        write(lower_bound_only, r.lower_bound_only as i32, "lower_bound_only")
    })
}

/// Selects a growth model for `n` pairs `(h[i], values[i])`, `h` strictly
/// decreasing. Writes the model, its `C`, its second parameter (`p`, `b` or
/// `nu`) and 1 in `ambiguous` for a near-tie.
///
/// # Safety
/// `h` and `values` must hold `n` entries; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn tl_fit_classify(
    h: *const f64,
    values: *const f64,
    n: usize,
    model: *mut TlModel,
    c: *mut f64,
    param: *mut f64,
    ambiguous: *mut i32,
) -> TlStatus {
    guard(|| {
        let h = slice(h, n, "h")?.to_vec();
        let v = slice(values, n, "values")?.to_vec();
        let series = lab(ScalingSeries::converged(h, v))?;
        let cls = lab(classify(&series))?;
        let fit = cls.selected_fit();
        let m = match fit.model {
            Model::PowerLaw => TlModel::PowerLaw,
            Model::LogEnhanced => TlModel::LogEnhanced,
            Model::Exponential => TlModel::Exponential,
        };
        write(model, m, "model")?;
        write(c, fit.c, "c")?;
        write(param, fit.param, "param")?;
        write(ambiguous, cls.ambiguous as i32, "ambiguous")
    })
}
