//! C ABI for the `conjmax` library.
//!
//! Polynomials are passed around as opaque `CmTrigPoly` handles created by
//! the `cm_poly_*` constructors and released with [`cm_poly_free`]. Every
//! fallible function returns a [`CmStatus`]; on failure a description is
//! available from [`cm_last_error_message`] on the same thread. Output
//! pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use conjmax::brownian::simulate_exit;
use conjmax::operators::{
    analytic_completion, cond_expect, conjugate_h, conjugate_j, is_analytic, mart_diff,
};
use conjmax::weaknorm::weak_type_ratio;
use conjmax::{Complex64, Error, FreqVector, TrigPoly};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    DimensionMismatch = 4,
    OutOfRange = 5,
    ResolutionTooLow = 6,
    NotReal = 7,
    ZeroPolynomial = 8,
    OutsidePolydisk = 9,
    CapHit = 10,
    InvalidUtf8 = 11,
    Panic = 12,
}

/// Opaque polynomial handle.
pub struct CmTrigPoly(TrigPoly);

/// Result of [`cm_weak_type_ratio`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CmWeakRatio {
    pub dim: usize,
    pub res: usize,
    pub l1: f64,
    pub weak_l1_of_m: f64,
    pub ratio: f64,
}

/// Result of [`cm_simulate_exit`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CmExit {
    pub tau: f64,
    pub exit_re: f64,
    pub exit_im: f64,
    pub n_samples: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CmStatus {
    match e {
        Error::FrequencyLength { .. } | Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => {
            CmStatus::DimensionMismatch
        }
        Error::OutOfRange { .. } => CmStatus::OutOfRange,
        Error::ResolutionTooLow { .. } => CmStatus::ResolutionTooLow,
        Error::OutsidePolydisk { .. } => CmStatus::OutsidePolydisk,
        Error::ZeroPolynomial => CmStatus::ZeroPolynomial,
        Error::NotReal => CmStatus::NotReal,
        Error::CapHit { .. } => CmStatus::CapHit,
        Error::Parse { .. } => CmStatus::Parse,
        Error::NotPastMeasurable { .. } | Error::InvalidParameter(_) => CmStatus::InvalidArgument,
    }
}

struct Failure(CmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CmStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, mapping errors and panics to status codes.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> CmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            CmStatus::Panic
        }
    }
}

unsafe fn poly_ref<'a>(p: *const CmTrigPoly) -> Result<&'a TrigPoly, Failure> {
    // SAFETY: the caller passes a handle obtained from this library or null
    unsafe { p.as_ref() }.map(|h| &h.0).ok_or_else(|| null("polynomial handle"))
}

unsafe fn emit_poly(out: *mut *mut CmTrigPoly, p: TrigPoly) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: checked non-null above
    unsafe { *out = Box::into_raw(Box::new(CmTrigPoly(p))) };
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: the caller guarantees `len` readable elements at `p`
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

/// Message describing the last failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses the text format (`dim N` line followed by `m_1 .. m_N re im` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_parse(text: *const c_char, out: *mut *mut CmTrigPoly) -> CmStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        // SAFETY: caller guarantees a NUL-terminated string
        let s = unsafe { CStr::from_ptr(text) }
            .to_str()
            .map_err(|e| Failure(CmStatus::InvalidUtf8, e.to_string()))?;
        let p: TrigPoly = s.parse()?;
        unsafe { emit_poly(out, p) }
    })
}

/// Builds a polynomial from `n_terms` frequency vectors stored row by row in
/// `freqs` (`n_terms * dim` entries) and coefficient parts `re`, `im`.
/// Repeated frequencies are summed.
///
/// # Safety
/// The arrays must hold the stated number of elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_from_terms(
    dim: usize,
    n_terms: usize,
    freqs: *const i32,
    re: *const f64,
    im: *const f64,
    out: *mut *mut CmTrigPoly,
) -> CmStatus {
    guard(|| {
        let len = n_terms
            .checked_mul(dim)
            .ok_or_else(|| Failure(CmStatus::InvalidArgument, "n_terms * dim overflows".into()))?;
        let (freqs, re, im) = unsafe {
            (
                slice(freqs, len, "freqs")?,
                slice(re, n_terms, "re")?,
                slice(im, n_terms, "im")?,
            )
        };
        let terms = (0..n_terms).map(|k| {
            (
                FreqVector::new(freqs[k * dim..(k + 1) * dim].to_vec()),
                Complex64::new(re[k], im[k]),
            )
        });
        let p = TrigPoly::new(dim, terms)?;
        unsafe { emit_poly(out, p) }
    })
}

/// Seeded random real polynomial with `|m_j| <= max_degree`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_random_real(
    dim: usize,
    max_degree: u32,
    seed: u64,
    zero_mean: bool,
    out: *mut *mut CmTrigPoly,
) -> CmStatus {
    guard(|| {
        let p = TrigPoly::random_real(dim, max_degree, seed, zero_mean)?;
        unsafe { emit_poly(out, p) }
    })
}

/// Releases a handle. Null is accepted and ignored.
///
/// # Safety
/// `p` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_free(p: *mut CmTrigPoly) {
    if !p.is_null() {
        // SAFETY: created by Box::into_raw in emit_poly
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_dim(p: *const CmTrigPoly) -> usize {
    unsafe { poly_ref(p) }.map_or(0, TrigPoly::dim)
}

/// Number of stored terms, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_num_terms(p: *const CmTrigPoly) -> usize {
    unsafe { poly_ref(p) }.map_or(0, TrigPoly::num_terms)
}

/// Harmonic extension at the polydisk point `(re[k] + i im[k])_k`; `n` must
/// equal the dimension.
///
/// # Safety
/// `re`, `im` must hold `n` values; `out_re`, `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_evaluate(
    p: *const CmTrigPoly,
    re: *const f64,
    im: *const f64,
    n: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CmStatus {
    guard(|| {
        let p = unsafe { poly_ref(p)? };
        let (re, im) = unsafe { (slice(re, n, "re")?, slice(im, n, "im")?) };
        if out_re.is_null() || out_im.is_null() {
            return Err(null("output pointer"));
        }
        let z: Vec<Complex64> = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let point = conjmax::PolydiskPoint::new(z)?;
        let v = p.evaluate(&point)?;
        unsafe {
            *out_re = v.re;
            *out_im = v.im;
        }
        Ok(())
    })
}

/// Text form of the polynomial; release it with [`cm_string_free`].
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_to_text(p: *const CmTrigPoly, out: *mut *mut c_char) -> CmStatus {
    guard(|| {
        let p = unsafe { poly_ref(p)? };
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let s = CString::new(p.to_string()).map_err(|e| Failure(CmStatus::InvalidArgument, e.to_string()))?;
        unsafe { *out = s.into_raw() };
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from [`cm_poly_to_text`] and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cm_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: created by CString::into_raw
        drop(unsafe { CString::from_raw(s) });
    }
}

unsafe fn unary(
    p: *const CmTrigPoly,
    out: *mut *mut CmTrigPoly,
    op: impl FnOnce(&TrigPoly) -> conjmax::Result<TrigPoly>,
) -> CmStatus {
    guard(|| {
        let p = unsafe { poly_ref(p)? };
        let q = op(p)?;
        unsafe { emit_poly(out, q) }
    })
}

/// `E(p | F_n)` for `0 <= n <= dim`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_cond_expect(p: *const CmTrigPoly, n: usize, out: *mut *mut CmTrigPoly) -> CmStatus {
    unsafe { unary(p, out, |q| cond_expect(q, n)) }
}

/// Martingale difference `d_j p` for `0 <= j <= dim`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_mart_diff(p: *const CmTrigPoly, j: usize, out: *mut *mut CmTrigPoly) -> CmStatus {
    unsafe { unary(p, out, |q| mart_diff(q, j)) }
}

/// One-variable conjugate `H_j p` for `1 <= j <= dim`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_conjugate_j(p: *const CmTrigPoly, j: usize, out: *mut *mut CmTrigPoly) -> CmStatus {
    unsafe { unary(p, out, |q| conjugate_j(q, j)) }
}

/// Conjugate function `H p`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_conjugate_h(p: *const CmTrigPoly, out: *mut *mut CmTrigPoly) -> CmStatus {
    unsafe { unary(p, out, |q| Ok(conjugate_h(q))) }
}

/// `p + i H p`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_analytic_completion(p: *const CmTrigPoly, out: *mut *mut CmTrigPoly) -> CmStatus {
    unsafe { unary(p, out, |q| Ok(analytic_completion(q))) }
}

/// Product of two polynomials of equal dimension.
///
/// # Safety
/// `a`, `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_multiply(
    a: *const CmTrigPoly,
    b: *const CmTrigPoly,
    out: *mut *mut CmTrigPoly,
) -> CmStatus {
    guard(|| {
        let (a, b) = unsafe { (poly_ref(a)?, poly_ref(b)?) };
        let q = a.multiply(b)?;
        unsafe { emit_poly(out, q) }
    })
}

/// Whether the spectrum lies in the half-space `O`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_poly_is_analytic(p: *const CmTrigPoly, out: *mut bool) -> CmStatus {
    guard(|| {
        let p = unsafe { poly_ref(p)? };
        if out.is_null() {
            return Err(null("output pointer"));
        }
        unsafe { *out = is_analytic(p) };
        Ok(())
    })
}

/// `||M p||*_1 / ||p||_1` on the `res^dim` grid for real nonzero `p`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cm_weak_type_ratio(p: *const CmTrigPoly, res: usize, out: *mut CmWeakRatio) -> CmStatus {
    guard(|| {
        let p = unsafe { poly_ref(p)? };
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let r = weak_type_ratio(p, res)?;
        unsafe {
            *out = CmWeakRatio {
                dim: r.dim,
                res: r.res,
                l1: r.l1,
                weak_l1_of_m: r.weak_l1_of_m,
                ratio: r.ratio,
            }
        };
        Ok(())
    })
}

/// Simulates one complex Brownian motion from 0 until it leaves the unit disk.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cm_simulate_exit(seed: u64, dt: f64, t_cap: f64, out: *mut CmExit) -> CmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let path = simulate_exit(seed, dt, t_cap)?;
        unsafe {
            *out = CmExit {
                tau: path.tau,
                exit_re: path.exit_point.re,
                exit_im: path.exit_point.im,
                n_samples: path.samples.len(),
            }
        };
        Ok(())
    })
}
