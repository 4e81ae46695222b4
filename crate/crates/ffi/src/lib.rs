//! C ABI over the core toolkit.
//!
//! Objects are opaque handles created by `*_new`/constructor functions and
//! released by the matching `*_free`. Every fallible call returns a
//! [`BoStatus`]; the message of the last failure on the calling thread is
//! available through [`bo_last_error`]. Complex numbers cross the boundary
//! as interleaved `(re, im)` pairs of `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bo_spectral::birkhoff::phi;
use bo_spectral::cli::config::random_potential;
use bo_spectral::fourier::RealField;
use bo_spectral::gauge::{gauge, one_gap_bandwidth, one_gap_potential};
use bo_spectral::lax::{spectral_data, SpectralData};
use bo_spectral::solver::{evolve, SolverConfig};
use bo_spectral::Error;
use num_complex::Complex64;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A parameter was out of range or inconsistent.
    InvalidArgument = 2,
    /// A numerical check failed (eigensolver, unresolved tail, ...).
    Numerical = 3,
    /// The time stepper exceeded its stability policy or blew up.
    Unstable = 4,
    /// The output buffer is too small; the required length was written.
    BufferTooSmall = 5,
    /// A panic was caught at the boundary.
    Internal = 6,
}

/// Opaque real zero-mean trigonometric polynomial.
pub struct BoField(RealField);

/// Opaque spectral data of the truncated Lax operator.
pub struct BoSpectrum(SpectralData);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BoStatus {
    match err.exit_code() {
        2 => BoStatus::InvalidArgument,
        4 => BoStatus::Unstable,
        _ => BoStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), BoStatus>) -> BoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BoStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            BoStatus::Internal
        }
    }
}

fn lift<T>(r: bo_spectral::Result<T>) -> Result<T, BoStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), BoStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        Err(BoStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Copies complex values into an interleaved buffer of `cap` doubles and
/// stores the number of complex values in `len`.
unsafe fn write_complex(values: &[Complex64], out: *mut f64, cap: usize, len: *mut usize) -> Result<(), BoStatus> {
    non_null(len, "len")?;
    *len = values.len();
    if 2 * values.len() > cap {
        set_error(format!("buffer holds {cap} doubles, {} needed", 2 * values.len()));
        return Err(BoStatus::BufferTooSmall);
    }
    if !values.is_empty() {
        non_null(out, "out")?;
    }
    for (i, v) in values.iter().enumerate() {
        *out.add(2 * i) = v.re;
        *out.add(2 * i + 1) = v.im;
    }
    Ok(())
}

unsafe fn write_real(values: &[f64], out: *mut f64, cap: usize, len: *mut usize) -> Result<(), BoStatus> {
    non_null(len, "len")?;
    *len = values.len();
    if values.len() > cap {
        set_error(format!("buffer holds {cap} doubles, {} needed", values.len()));
        return Err(BoStatus::BufferTooSmall);
    }
    if !values.is_empty() {
        non_null(out, "out")?;
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    }
    Ok(())
}

unsafe fn emit<T>(value: T, out: *mut *mut T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a field from its positive modes `c_1..c_n`, given as `2n` doubles.
///
/// # Safety
/// `modes` must point to `2 * n_modes` readable doubles and `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bo_field_from_modes(modes: *const f64, n_modes: usize, out: *mut *mut BoField) -> BoStatus {
    guard(|| {
        non_null(out, "out")?;
        if n_modes > 0 {
            non_null(modes, "modes")?;
        }
        let c: Vec<Complex64> =
            (0..n_modes).map(|k| Complex64::new(*modes.add(2 * k), *modes.add(2 * k + 1))).collect();
        emit(BoField(lift(RealField::from_positive_modes(&c))?), out);
        Ok(())
    })
}

/// Traveling-wave potential with `c_k = alpha^k`, truncated where the modes
/// reach round-off.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bo_field_one_gap(alpha_re: f64, alpha_im: f64, out: *mut *mut BoField) -> BoStatus {
    guard(|| {
        non_null(out, "out")?;
        let a = Complex64::new(alpha_re, alpha_im);
        if !(a.norm() > 0.0 && a.norm() < 1.0) {
            set_error(format!("one-gap parameter must satisfy 0 < |alpha| < 1, got {}", a.norm()));
            return Err(BoStatus::InvalidArgument);
        }
        emit(BoField(lift(one_gap_potential(a, one_gap_bandwidth(a)))?), out);
        Ok(())
    })
}

/// Seeded random field of the given bandwidth rescaled to `||u||_0 = norm`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bo_field_random(seed: u64, bandwidth: usize, norm: f64, out: *mut *mut BoField) -> BoStatus {
    guard(|| {
        non_null(out, "out")?;
        if bandwidth == 0 || !norm.is_finite() || norm < 0.0 {
            set_error("bandwidth must be positive and norm finite and non-negative".into());
            return Err(BoStatus::InvalidArgument);
        }
        emit(BoField(random_potential(seed, bandwidth, norm)), out);
        Ok(())
    })
}

/// # Safety
/// `field` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn bo_field_free(field: *mut BoField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Bandwidth of the field, or 0 for a null handle.
///
/// # Safety
/// `field` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bo_field_bandwidth(field: *const BoField) -> usize {
    field.as_ref().map_or(0, |f| f.0.bandwidth())
}

/// Writes the positive modes `c_1..c_N` into `out` (`2N` doubles).
///
/// # Safety
/// `field` must be live, `out` must hold `cap` doubles and `len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bo_field_modes(field: *const BoField, out: *mut f64, cap: usize, len: *mut usize) -> BoStatus {
    guard(|| {
        non_null(field, "field")?;
        write_complex(&(*field).0.positive_modes(), out, cap, len)
    })
}

/// Mean square `||u||_0^2 = sum_k |c_k|^2` over all modes.
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bo_field_mean_square(field: *const BoField) -> f64 {
    field.as_ref().map_or(f64::NAN, |f| f.0.mean_square())
}

/// Gauge transform: writes the modes `w_1..w_K` of the mean-free Hardy
/// element.
///
/// # Safety
/// As for [`bo_field_modes`].
#[no_mangle]
pub unsafe extern "C" fn bo_gauge(field: *const BoField, out: *mut f64, cap: usize, len: *mut usize) -> BoStatus {
    guard(|| {
        non_null(field, "field")?;
        let w = lift(gauge(&(*field).0))?;
        let modes: Vec<Complex64> = (1..=w.bandwidth() as i64).map(|n| w.coeff(n)).collect();
        write_complex(&modes, out, cap, len)
    })
}

/// Evolves the field to time `t_final` on a dealiased grid of the given
/// bandwidth and returns the final state as a new handle.
///
/// # Safety
/// `field` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bo_evolve(
    field: *const BoField,
    bandwidth: usize,
    dt: f64,
    t_final: f64,
    out: *mut *mut BoField,
) -> BoStatus {
    guard(|| {
        non_null(field, "field")?;
        non_null(out, "out")?;
        let cfg = SolverConfig { bandwidth, dt, t_final, sample_times: vec![t_final] };
        let traj = lift(evolve(&(*field).0, &cfg))?;
        let last = traj.final_state().cloned().ok_or(BoStatus::Internal)?;
        emit(BoField(last), out);
        Ok(())
    })
}

/// Eigen-decomposition of the Lax operator truncated to `m` modes.
///
/// # Safety
/// `field` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bo_spectrum_new(field: *const BoField, m: usize, out: *mut *mut BoSpectrum) -> BoStatus {
    guard(|| {
        non_null(field, "field")?;
        non_null(out, "out")?;
        emit(BoSpectrum(lift(spectral_data(&(*field).0, m))?), out);
        Ok(())
    })
}

/// # Safety
/// `spec` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn bo_spectrum_free(spec: *mut BoSpectrum) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Size `P` of the trusted index range `1..=P`, or 0 for a null handle.
///
/// # Safety
/// `spec` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn bo_spectrum_trusted(spec: *const BoSpectrum) -> usize {
    spec.as_ref().map_or(0, |s| s.0.trusted())
}

/// Eigenvalues `lambda_0..lambda_P` of the trusted range.
///
/// # Safety
/// `spec` must be live, `out` must hold `cap` doubles and `len` be valid.
#[no_mangle]
pub unsafe extern "C" fn bo_spectrum_eigenvalues(
    spec: *const BoSpectrum,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> BoStatus {
    guard(|| {
        non_null(spec, "spec")?;
        let s = &(*spec).0;
        write_real(&s.lambdas()[..=s.trusted()], out, cap, len)
    })
}

/// Gaps `gamma_1..gamma_P`.
///
/// # Safety
/// As for [`bo_spectrum_eigenvalues`].
#[no_mangle]
pub unsafe extern "C" fn bo_spectrum_gaps(
    spec: *const BoSpectrum,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> BoStatus {
    guard(|| {
        non_null(spec, "spec")?;
        let s = &(*spec).0;
        let gaps: Vec<f64> = (1..=s.trusted()).map(|n| s.gamma(n)).collect();
        write_real(&gaps, out, cap, len)
    })
}

/// Birkhoff coordinates `zeta_1..zeta_P` as interleaved pairs.
///
/// # Safety
/// As for [`bo_spectrum_eigenvalues`].
#[no_mangle]
pub unsafe extern "C" fn bo_spectrum_birkhoff(
    spec: *const BoSpectrum,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> BoStatus {
    guard(|| {
        non_null(spec, "spec")?;
        write_complex(phi(&(*spec).0).zeta().entries(), out, cap, len)
    })
}
