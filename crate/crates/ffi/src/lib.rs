//! C ABI for elliptic-lab.
//!
//! Every function returns an [`ElStatus`]; on failure the message is kept in a
//! thread-local slot readable with [`el_last_error_message`]. Matrices are
//! opaque [`ElMatrix`] handles freed with [`el_matrix_free`]. Laws and queries
//! are passed as JSON strings in the same format as the CLI configs.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use elliptic_lab::anticonc::{small_ball_exact, SmallBallQuery};
use elliptic_lab::elliptic::{inside_fraction, EllipticLaw};
use elliptic_lab::ensemble::EnsembleSpec;
use elliptic_lab::limitlaw::solve_stu_system;
use elliptic_lab::linalg::{eigenvalues, singular_values};
use elliptic_lab::spectra::EmpiricalMeasure2D;
use elliptic_lab::{Complex64, ComplexMatrix, LabError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonConvergence = 3,
    Singular = 4,
    Unsupported = 5,
    TooLarge = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque handle to a dense complex matrix.
pub struct ElMatrix(ComplexMatrix);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &LabError) -> ElStatus {
    match e {
        LabError::Validation(_) | LabError::Json(_) => ElStatus::InvalidArgument,
        LabError::NonConvergence { .. } => ElStatus::NonConvergence,
        LabError::Singular(_) => ElStatus::Singular,
        LabError::Unsupported(_) => ElStatus::Unsupported,
        LabError::TooLarge { .. } => ElStatus::TooLarge,
        LabError::Io(_) => ElStatus::Io,
    }
}

struct Fail(ElStatus, String);

impl From<LabError> for Fail {
    fn from(e: LabError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ElStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            ElStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ElStatus::Panic
        }
    }
}

fn null(name: &str) -> Fail {
    Fail(ElStatus::NullPointer, format!("{name} is null"))
}

unsafe fn json_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(ElStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn matrix<'a>(m: *const ElMatrix) -> Result<&'a ComplexMatrix, Fail> {
    m.as_ref().map(|m| &m.0).ok_or_else(|| null("matrix"))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, need: usize, name: &str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    if len < need {
        return Err(Fail(ElStatus::BufferTooSmall, format!("{name} holds {len} values, {need} needed")));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn el_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// NUL-terminated library version.
#[no_mangle]
pub extern "C" fn el_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds an n x n matrix from row-major real and imaginary parts. `im` may be null.
///
/// # Safety
/// `re` (and `im` when non-null) must be valid for n*n reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn el_matrix_from_parts(
    n: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut ElMatrix,
) -> ElStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let count = n.checked_mul(n).ok_or_else(|| Fail(ElStatus::InvalidArgument, "n too large".into()))?;
        let re = std::slice::from_raw_parts(re, count);
        let data: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, count);
            re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()
        };
        let m = ComplexMatrix::from_vec(n, data)?;
        *out = Box::into_raw(Box::new(ElMatrix(m)));
        Ok(())
    })
}

/// Generates trial `trial` of the ensemble described by `spec_json`
/// (fields n, pair, optional diagonal and perturbation, seed). The matrix is unscaled.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn el_matrix_generate(spec_json: *const c_char, trial: u64, out: *mut *mut ElMatrix) -> ElStatus {
    guard(|| {
        let text = json_arg(spec_json, "spec_json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let spec: EnsembleSpec = serde_json::from_str(text).map_err(LabError::from)?;
        let m = spec.generate_trial(trial)?;
        *out = Box::into_raw(Box::new(ElMatrix(m)));
        Ok(())
    })
}

/// Frees a handle; null is ignored.
///
/// # Safety
/// `m` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn el_matrix_free(m: *mut ElMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle and `n` writable.
#[no_mangle]
pub unsafe extern "C" fn el_matrix_order(m: *const ElMatrix, n: *mut usize) -> ElStatus {
    guard(|| {
        let m = matrix(m)?;
        *n.as_mut().ok_or_else(|| null("n"))? = m.n();
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn el_matrix_get(m: *const ElMatrix, i: usize, j: usize, re: *mut f64, im: *mut f64) -> ElStatus {
    guard(|| {
        let m = matrix(m)?;
        if i >= m.n() || j >= m.n() {
            return Err(Fail(ElStatus::InvalidArgument, format!("index ({i}, {j}) out of range for order {}", m.n())));
        }
        let z = m.as_slice()[i * m.n() + j];
        *re.as_mut().ok_or_else(|| null("re"))? = z.re;
        *im.as_mut().ok_or_else(|| null("im"))? = z.im;
        Ok(())
    })
}

/// Eigenvalues of `m` scaled by `scale` (pass 1/sqrt(n) for the ESD
/// normalization). Buffers need room for n values.
///
/// # Safety
/// `m` must be a live handle; `re` and `im` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn el_eigenvalues(
    m: *const ElMatrix,
    scale: f64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> ElStatus {
    guard(|| {
        let m = matrix(m)?;
        let n = m.n();
        let re = out_slice(re, len, n, "re")?;
        let im = out_slice(im, len, n, "im")?;
        let eigs = eigenvalues(&m.scaled(scale))?;
        for (k, z) in eigs.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// Singular values of `m` scaled by `scale`, in decreasing order.
///
/// # Safety
/// `m` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn el_singular_values(m: *const ElMatrix, scale: f64, out: *mut f64, len: usize) -> ElStatus {
    guard(|| {
        let m = matrix(m)?;
        let out = out_slice(out, len, m.n(), "out")?;
        out.copy_from_slice(&singular_values(&m.scaled(scale))?);
        Ok(())
    })
}

/// Fraction of the points (re[k], im[k]) inside the elliptic-law support for
/// real `rho`, inflated by `inflation`.
///
/// # Safety
/// `re` and `im` must be valid for `count` reads; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn el_inside_fraction(
    re: *const f64,
    im: *const f64,
    count: usize,
    rho: f64,
    inflation: f64,
    out: *mut f64,
) -> ElStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null("points"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let re = std::slice::from_raw_parts(re, count);
        let im = std::slice::from_raw_parts(im, count);
        let pts = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        *out = inside_fraction(&EmpiricalMeasure2D::new(pts), &EllipticLaw::real(rho)?, inflation);
        Ok(())
    })
}

/// Solves the (s, t, u) system at (rho, z, alpha). `out` receives
/// s, t, u as six doubles (re, im interleaved).
///
/// # Safety
/// `out` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn el_solve_stu(
    rho: f64,
    z_re: f64,
    z_im: f64,
    alpha_re: f64,
    alpha_im: f64,
    out: *mut f64,
    len: usize,
) -> ElStatus {
    guard(|| {
        let out = out_slice(out, len, 6, "out")?;
        let st = solve_stu_system(rho, Complex64::new(z_re, z_im), Complex64::new(alpha_re, alpha_im))?;
        out.copy_from_slice(&[st.s.re, st.s.im, st.t.re, st.t.im, st.u.re, st.u.im]);
        Ok(())
    })
}

/// Exact small-ball probability for a JSON query (fields a, optional b, f,
/// f2, atom, beta). `exact` is set to 0 when only the 2-approximation was used.
///
/// # Safety
/// `query_json` must be a NUL-terminated string; `gamma` and `exact` writable.
#[no_mangle]
pub unsafe extern "C" fn el_small_ball_exact(query_json: *const c_char, gamma: *mut f64, exact: *mut i32) -> ElStatus {
    guard(|| {
        let text = json_arg(query_json, "query_json")?;
        let q: SmallBallQuery = serde_json::from_str(text).map_err(LabError::from)?;
        let g = gamma.as_mut().ok_or_else(|| null("gamma"))?;
        let e = exact.as_mut().ok_or_else(|| null("exact"))?;
        let r = small_ball_exact(&q)?;
        *g = r.gamma;
        *e = i32::from(r.exact);
        Ok(())
    })
}
