//! C ABI for recordlab.
//!
//! Objects cross the boundary as opaque handles created by `rl_*_new` style
//! functions and released with the matching `rl_*_free`. Every fallible call
//! returns an [`RlStatus`]; on failure a description is available from
//! [`rl_last_error`] on the same thread. Complex numbers are passed as
//! interleaved `re, im` pairs, matrices row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;
use recordlab::cli::{run_config, ScenarioConfig};
use recordlab::hilbert::{
    self, CompositeDims, DensityOperator, StateVector, UnitaryOperator,
};
use recordlab::linalg::{CMatrix, CVector};
use recordlab::povm::{self, SequentialMeasurement};
use recordlab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotPhysical = 4,
    VerdictFailed = 5,
    Config = 6,
    Io = 7,
    Panic = 8,
}

pub struct RlDensity {
    inner: DensityOperator,
}

pub struct RlUnitary {
    inner: UnitaryOperator,
}

pub struct RlPovm {
    inner: SequentialMeasurement,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RlStatus {
    match err {
        Error::DimensionMismatch { .. } => RlStatus::DimensionMismatch,
        Error::NotNormalized { .. }
        | Error::NotHermitian { .. }
        | Error::NotPositive { .. }
        | Error::NotUnitTrace { .. }
        | Error::NotUnitary { .. } => RlStatus::NotPhysical,
        Error::InvalidConfig { .. } => RlStatus::Config,
        Error::Io(_) => RlStatus::Io,
        _ => RlStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> RlStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn null(what: &str) -> RlStatus {
    set_error(format!("{what} is null"));
    RlStatus::NullPointer
}

/// Runs `f`, turning a panic into [`RlStatus::Panic`].
fn guard<F: FnOnce() -> RlStatus>(f: F) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            RlStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn dims_from(dims: *const usize, ndims: usize) -> Result<CompositeDims, RlStatus> {
    let d = slice(dims, ndims).ok_or_else(|| null("dims"))?;
    CompositeDims::new(d.to_vec()).map_err(fail)
}

unsafe fn matrix_from(data: *const f64, n: usize) -> Result<CMatrix, RlStatus> {
    let d = slice(data, 2 * n * n).ok_or_else(|| null("data"))?;
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        Complex64::new(d[k], d[k + 1])
    }))
}

unsafe fn write_complex<'a>(
    out: *mut f64,
    len: usize,
    values: impl ExactSizeIterator<Item = &'a Complex64>,
) -> RlStatus {
    if out.is_null() {
        return null("out");
    }
    let needed = 2 * values.len();
    if len < needed {
        set_error(format!("buffer holds {len} doubles, {needed} needed"));
        return RlStatus::InvalidArgument;
    }
    for (k, z) in values.enumerate() {
        *out.add(2 * k) = z.re;
        *out.add(2 * k + 1) = z.im;
    }
    RlStatus::Ok
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a density operator from a `2·n·n` interleaved row-major matrix,
/// `n` being the product of `dims`.
///
/// # Safety
/// `data` must point to `2·n·n` doubles, `dims` to `ndims` sizes and `out`
/// to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rl_density_new(
    data: *const f64,
    dims: *const usize,
    ndims: usize,
    out: *mut *mut RlDensity,
) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let dims = match dims_from(dims, ndims) {
            Ok(d) => d,
            Err(s) => return s,
        };
        let m = match matrix_from(data, dims.total()) {
            Ok(m) => m,
            Err(s) => return s,
        };
        match DensityOperator::new(m, dims) {
            Ok(rho) => {
                *out = Box::into_raw(Box::new(RlDensity { inner: rho }));
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Random density operator of the given rank.
///
/// # Safety
/// `out` must point to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rl_random_density(
    dim: usize,
    rank: usize,
    seed: u64,
    out: *mut *mut RlDensity,
) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match hilbert::random_density(dim, rank, seed) {
            Ok(rho) => {
                *out = Box::into_raw(Box::new(RlDensity { inner: rho }));
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `rho` must be null or a handle from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn rl_density_free(rho: *mut RlDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Total dimension, 0 for a null handle.
///
/// # Safety
/// `rho` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rl_density_dim(rho: *const RlDensity) -> usize {
    rho.as_ref().map_or(0, |r| r.inner.dim())
}

/// Copies the matrix into `out` (`2·n·n` doubles, interleaved row-major).
///
/// # Safety
/// `rho` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_density_matrix(rho: *const RlDensity, out: *mut f64, len: usize) -> RlStatus {
    guard(|| {
        let Some(rho) = rho.as_ref() else {
            return null("rho");
        };
        let m = rho.inner.matrix();
        // nalgebra is column-major; walk rows explicitly
        let n = m.nrows();
        let rows: Vec<Complex64> = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
        write_complex(out, len, rows.iter())
    })
}

/// Reduced state on the factors listed in `keep`, in ascending order.
///
/// # Safety
/// `rho` must be a live handle, `keep` must point to `nkeep` indices and
/// `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rl_partial_trace(
    rho: *const RlDensity,
    keep: *const usize,
    nkeep: usize,
    out: *mut *mut RlDensity,
) -> RlStatus {
    guard(|| {
        let Some(rho) = rho.as_ref() else {
            return null("rho");
        };
        let Some(keep) = slice(keep, nkeep) else {
            return null("keep");
        };
        if out.is_null() {
            return null("out");
        }
        match hilbert::partial_trace(&rho.inner, keep) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(RlDensity { inner: r }));
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// `Tr(ρσ)`.
///
/// # Safety
/// `rho` and `sigma` must be live handles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_hs_inner(
    rho: *const RlDensity,
    sigma: *const RlDensity,
    out: *mut f64,
) -> RlStatus {
    guard(|| {
        let (Some(a), Some(b)) = (rho.as_ref(), sigma.as_ref()) else {
            return null("operand");
        };
        if out.is_null() {
            return null("out");
        }
        match hilbert::hs_inner(&a.inner, &b.inner) {
            Ok(x) => {
                *out = x;
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes the canonical purification of `rho` (`d·d` amplitudes on
/// `S ⊗ S′`, interleaved) into `out`.
///
/// # Safety
/// `rho` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_purify(rho: *const RlDensity, out: *mut f64, len: usize) -> RlStatus {
    guard(|| {
        let Some(rho) = rho.as_ref() else {
            return null("rho");
        };
        let psi = hilbert::purify(&rho.inner);
        write_complex(out, len, psi.amplitudes().iter())
    })
}

/// `UρU†`.
///
/// # Safety
/// `rho` and `u` must be live handles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_density_evolve(
    rho: *const RlDensity,
    u: *const RlUnitary,
    out: *mut *mut RlDensity,
) -> RlStatus {
    guard(|| {
        let (Some(rho), Some(u)) = (rho.as_ref(), u.as_ref()) else {
            return null("operand");
        };
        if out.is_null() {
            return null("out");
        }
        let rho = if rho.inner.dims() == u.inner.dims() {
            Ok(rho.inner.clone())
        } else {
            rho.inner.with_dims(u.inner.dims().clone())
        };
        match rho.and_then(|r| r.evolve(&u.inner)) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(RlDensity { inner: r }));
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Builds a unitary from a `2·n·n` interleaved row-major matrix.
///
/// # Safety
/// As for [`rl_density_new`].
#[no_mangle]
pub unsafe extern "C" fn rl_unitary_new(
    data: *const f64,
    dims: *const usize,
    ndims: usize,
    out: *mut *mut RlUnitary,
) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let dims = match dims_from(dims, ndims) {
            Ok(d) => d,
            Err(s) => return s,
        };
        let m = match matrix_from(data, dims.total()) {
            Ok(m) => m,
            Err(s) => return s,
        };
        match UnitaryOperator::new(m, dims) {
            Ok(u) => {
                *out = Box::into_raw(Box::new(RlUnitary { inner: u }));
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Haar-random unitary.
///
/// # Safety
/// `out` must point to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rl_random_unitary(dim: usize, seed: u64, out: *mut *mut RlUnitary) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        if dim == 0 {
            set_error("dimension 0".into());
            return RlStatus::InvalidArgument;
        }
        *out = Box::into_raw(Box::new(RlUnitary {
            inner: hilbert::random_unitary(dim, seed),
        }));
        RlStatus::Ok
    })
}

/// # Safety
/// `u` must be null or a handle from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn rl_unitary_free(u: *mut RlUnitary) {
    if !u.is_null() {
        drop(Box::from_raw(u));
    }
}

unsafe fn basis_from(data: *const f64, d: usize) -> Result<Vec<StateVector>, RlStatus> {
    let v = slice(data, 2 * d * d).ok_or_else(|| null("basis"))?;
    (0..d)
        .map(|k| {
            let amps = CVector::from_fn(d, |i, _| {
                let at = 2 * (k * d + i);
                Complex64::new(v[at], v[at + 1])
            });
            StateVector::new(amps, CompositeDims::single(d)).map_err(fail)
        })
        .collect()
}

/// Sequential measurement: first in `y_basis`, then evolve by `evolution`,
/// then measure in `z_basis`. Each basis is `d` vectors of `d` interleaved
/// amplitudes, one vector after the other.
///
/// # Safety
/// `y_basis` and `z_basis` must hold `2·d·d` doubles for `d` the dimension of
/// `evolution`, a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_povm_new(
    y_basis: *const f64,
    z_basis: *const f64,
    evolution: *const RlUnitary,
    out: *mut *mut RlPovm,
) -> RlStatus {
    guard(|| {
        let Some(u) = evolution.as_ref() else {
            return null("evolution");
        };
        if out.is_null() {
            return null("out");
        }
        let d = u.inner.dim();
        let (y, z) = match (basis_from(y_basis, d), basis_from(z_basis, d)) {
            (Ok(y), Ok(z)) => (y, z),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let evolution = match u.inner.with_dims(CompositeDims::single(d)) {
            Ok(e) => e,
            Err(e) => return fail(e),
        };
        match povm::build_sequential_povm(y, z, evolution) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(RlPovm { inner: m }));
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Oscillator preset on `levels` levels with phase-space rotation `theta`.
///
/// # Safety
/// `out` must point to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rl_povm_oscillator(levels: usize, theta: f64, out: *mut *mut RlPovm) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match povm::oscillator_preset(levels, theta) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(RlPovm { inner: m }));
                RlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `m` must be null or a handle from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn rl_povm_free(m: *mut RlPovm) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Writes `p(k,l)` at index `k·d + l` (`d²` doubles).
///
/// # Safety
/// `m` and `rho0` must be live handles and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_povm_probabilities(
    m: *const RlPovm,
    rho0: *const RlDensity,
    out: *mut f64,
    len: usize,
) -> RlStatus {
    guard(|| {
        let (Some(m), Some(rho0)) = (m.as_ref(), rho0.as_ref()) else {
            return null("operand");
        };
        if out.is_null() {
            return null("out");
        }
        let probs = match povm::outcome_probabilities(&m.inner, &rho0.inner) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        if len < probs.len() {
            set_error(format!("buffer holds {len} doubles, {} needed", probs.len()));
            return RlStatus::InvalidArgument;
        }
        for (k, p) in probs.iter().enumerate() {
            *out.add(k) = p.p;
        }
        RlStatus::Ok
    })
}

/// `max |Σ F(k,l) − 1|`.
///
/// # Safety
/// `m` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_povm_identity_residual(m: *const RlPovm, out: *mut f64) -> RlStatus {
    guard(|| {
        let Some(m) = m.as_ref() else {
            return null("m");
        };
        if out.is_null() {
            return null("out");
        }
        *out = povm::check_povm(&m.inner).identity_residual;
        RlStatus::Ok
    })
}

/// Runs one scenario given as JSON text, writes its report under
/// `outdir/<name>/` and hands back the report JSON in `report` (free it with
/// [`rl_string_free`]). Returns [`RlStatus::VerdictFailed`] with a report
/// when some verdict fails.
///
/// # Safety
/// `config_json` and `outdir` must be NUL-terminated strings; `report` must
/// be null or writable.
#[no_mangle]
pub unsafe extern "C" fn rl_run_scenario(
    config_json: *const c_char,
    outdir: *const c_char,
    report: *mut *mut c_char,
) -> RlStatus {
    guard(|| {
        if config_json.is_null() {
            return null("config_json");
        }
        if outdir.is_null() {
            return null("outdir");
        }
        let (Ok(text), Ok(dir)) = (CStr::from_ptr(config_json).to_str(), CStr::from_ptr(outdir).to_str())
        else {
            set_error("strings must be UTF-8".into());
            return RlStatus::InvalidArgument;
        };
        let result = ScenarioConfig::parse(text, "scenario").and_then(|c| run_config(c, Path::new(dir)));
        match result {
            Ok(r) => {
                if !report.is_null() {
                    let json = serde_json::to_string(&r).unwrap_or_default();
                    *report = CString::new(json).map_or(ptr::null_mut(), CString::into_raw);
                }
                if r.passed {
                    RlStatus::Ok
                } else {
                    set_error("some verdict failed".into());
                    RlStatus::VerdictFailed
                }
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn rl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
