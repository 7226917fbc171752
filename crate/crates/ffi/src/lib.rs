//! C ABI over `lpfock`.
//!
//! Every fallible function returns an [`LpfockStatus`]. On failure the message
//! is kept per thread and can be read with [`lpfock_last_error_message`].
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use lpfock::cli::builtin_system;
use lpfock::error::Error;
use lpfock::exponent::PExponent;
use lpfock::fock::crossed::{crossed_relations, CrossedTruncation, DynSystem};
use lpfock::fock::cuntz::{annihilation_norm, creation_norm, leavitt_check, FockIndex};
use lpfock::linop::{CMatrix, C64};
use lpfock::norm::{certify_matrix, CertifyOptions};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpfockStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    /// The library rejected the input; see the last error message.
    Library = 4,
    Panic = 5,
}

/// Truncated Cuntz-type Fock space with a fixed exponent.
pub struct LpfockFock {
    index: FockIndex,
    p: PExponent,
}

/// Truncated crossed-product Fock space of a dynamical system.
pub struct LpfockCrossed {
    truncation: CrossedTruncation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(LpfockStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(LpfockStatus::Library, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(LpfockStatus::InvalidArgument, msg.into())
}

fn null(name: &str) -> Failure {
    Failure(LpfockStatus::NullPointer, format!("`{name}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LpfockStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LpfockStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            LpfockStatus::Panic
        }
    }
}

fn exponent(p: f64) -> Result<PExponent, Failure> {
    PExponent::new(p).map_err(|e| invalid(e.to_string()))
}

unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(LpfockStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn complex_arg(re: *const f64, im: *const f64, len: usize) -> Result<Vec<C64>, Failure> {
    if len == 0 {
        return Err(invalid("length must be positive"));
    }
    if re.is_null() {
        return Err(null("re"));
    }
    let re = std::slice::from_raw_parts(re, len);
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, len)) };
    Ok((0..len).map(|k| C64::new(re[k], im.map_or(0.0, |v| v[k]))).collect())
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lpfock_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf`, NUL-terminated.
/// Returns the message length without the terminator, 0 when there is no
/// error, or -1 when `buf` is too small (nothing is written then).
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null when `len` is 0.
#[no_mangle]
pub unsafe extern "C" fn lpfock_last_error_message(buf: *mut c_char, len: usize) -> isize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if buf.is_null() || bytes.len() > len {
                return -1;
            }
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
            (bytes.len() - 1) as isize
        }
    })
}

/// Certified bracket for the `p → p` operator norm of a `rows × cols` complex
/// matrix given row-major. `im` may be null for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `rows * cols` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn lpfock_matrix_norm(
    rows: usize,
    cols: usize,
    re: *const f64,
    im: *const f64,
    p: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> LpfockStatus {
    guard(|| {
        let p = exponent(p)?;
        let n = rows.checked_mul(cols).ok_or_else(|| invalid("matrix too large"))?;
        let entries = complex_arg(re, im, n)?;
        let m = CMatrix::from_row_slice(rows, cols, &entries);
        let b = certify_matrix(&m, p.p(), &CertifyOptions::default());
        write(lower, b.lower, "lower")?;
        write(upper, b.upper, "upper")
    })
}

/// Creates the truncation of the Fock space over `ℓ^p_d` with levels
/// `0..=levels`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn lpfock_fock_new(d: usize, levels: usize, p: f64, out: *mut *mut LpfockFock) -> LpfockStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = exponent(p)?;
        let index = FockIndex::new(d, levels)?;
        out.write(Box::into_raw(Box::new(LpfockFock { index, p })));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`lpfock_fock_new`] and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn lpfock_fock_free(h: *mut LpfockFock) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dimension of the truncated space, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lpfock_fock_dim(h: *const LpfockFock) -> usize {
    h.as_ref().map_or(0, |h| h.index.dim())
}

/// Largest residual of the three Leavitt relations on the valid window and
/// the rank of the defect of the third relation.
///
/// # Safety
/// `h` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpfock_fock_leavitt(
    h: *const LpfockFock,
    residual: *mut f64,
    defect_rank: *mut usize,
) -> LpfockStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        let r = leavitt_check(&h.index, h.p)?;
        write(residual, r.max_residual(), "residual")?;
        write(defect_rank, r.defect.rank, "defect_rank")
    })
}

/// Norm bracket of the creation operator `c(x)` (or the annihilation
/// operator `v(x)` when `annihilation` is true) with `x ∈ ℂ^d`.
///
/// # Safety
/// `h` must be a live handle; `re` (and `im` when non-null) must point to
/// `d` readable doubles; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpfock_fock_operator_norm(
    h: *const LpfockFock,
    re: *const f64,
    im: *const f64,
    annihilation: bool,
    lower: *mut f64,
    upper: *mut f64,
) -> LpfockStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        let x = complex_arg(re, im, h.index.d())?;
        let opts = CertifyOptions::default();
        let check = if annihilation {
            annihilation_norm(&x, &h.index, h.p, &opts)?
        } else {
            creation_norm(&x, &h.index, h.p, &opts)?
        };
        write(lower, check.bracket.lower, "lower")?;
        write(upper, check.bracket.upper, "upper")
    })
}

unsafe fn crossed_out(out: *mut *mut LpfockCrossed, sys: DynSystem, levels: usize) -> Result<(), Failure> {
    let truncation = CrossedTruncation::new(Arc::new(sys), levels)?;
    out.write(Box::into_raw(Box::new(LpfockCrossed { truncation })));
    Ok(())
}

/// Creates a crossed truncation from a built-in system: `m2-swap`,
/// `diag2-swap` or `diag3-cyclic`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpfock_crossed_builtin(
    name: *const c_char,
    p: f64,
    levels: usize,
    out: *mut *mut LpfockCrossed,
) -> LpfockStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = str_arg(name, "name")?;
        let sys = builtin_system(name, exponent(p)?)?;
        crossed_out(out, sys, levels)
    })
}

/// Creates a crossed truncation from JSON documents: the algebra as
/// `{"basis": [{"name", "matrix"}], "mu"?}` and the automorphism as
/// `{"permutation": [...]}` or `{"matrix": ...}`.
///
/// # Safety
/// Both strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpfock_crossed_from_json(
    algebra: *const c_char,
    phi: *const c_char,
    p: f64,
    levels: usize,
    out: *mut *mut LpfockCrossed,
) -> LpfockStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let algebra = str_arg(algebra, "algebra")?;
        let phi = str_arg(phi, "phi")?;
        let sys = DynSystem::from_json(algebra, phi, exponent(p)?)?;
        crossed_out(out, sys, levels)
    })
}

/// # Safety
/// `h` must come from one of the `lpfock_crossed_*` constructors and not be
/// used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lpfock_crossed_free(h: *mut LpfockCrossed) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dimension of the truncated space, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lpfock_crossed_dim(h: *const LpfockCrossed) -> usize {
    h.as_ref().map_or(0, |h| h.truncation.dim())
}

/// Largest residual of the covariance relations for two seeded random
/// elements of the algebra.
///
/// # Safety
/// `h` must be a live handle; `residual` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpfock_crossed_relations(
    h: *const LpfockCrossed,
    seed: u64,
    residual: *mut f64,
) -> LpfockStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        let ab = h.truncation.system().seeded_elements(seed, 2);
        let r = crossed_relations(&h.truncation, &ab[0], &ab[1])?;
        write(residual, r.max_residual(), "residual")
    })
}

/// Full JSON report of the crossed truncation, the same document the
/// `fock-crossed` subcommand prints. Free the string with
/// [`lpfock_string_free`].
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpfock_crossed_report(h: *const LpfockCrossed, seed: u64, out: *mut *mut c_char) -> LpfockStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        let sys = h.truncation.system().clone();
        let (_, _, report) = lpfock::cli::fock_crossed_report(sys, h.truncation.levels(), seed, 1e-12, 1e-3)?;
        let text = serde_json::to_string(&report).map_err(|e| Failure(LpfockStatus::Library, e.to_string()))?;
        let s = CString::new(text).map_err(|e| Failure(LpfockStatus::Library, e.to_string()))?;
        out.write(s.into_raw());
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn lpfock_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
