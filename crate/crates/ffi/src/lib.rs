//! C ABI for `olsform`.
//!
//! Conventions:
//!
//! * every fallible function returns an [`OlsStatus`]; results go through
//!   out-pointers, which are left untouched on failure;
//! * matrices cross the boundary as column-major `double` arrays;
//! * coefficient and row indices are 1-based, matching the Rust API;
//! * handles ([`OlsMatrix`], [`OlsBasis`], [`OlsPinv`]) are opaque, created by
//!   `*_new` and released by the matching `*_free`, which accepts `NULL`;
//! * the message for the last failure on the calling thread is available from
//!   [`ols_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use olsform::epistasis::InteractionModel;
use olsform::weighted::{weighted_coeffs, weighted_sgso};
use olsform::{
    coeff_single, coeffs_projected, fit, generalized_inverse_from_basis, precision_element, sgso,
    DenseMatrix, Error, PseudoInverse, SgsoBasis,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OlsStatus {
    Ok = 0,
    NullPointer = 1,
    Dimension = 2,
    NonFinite = 3,
    RankDeficient = 4,
    NotSymmetric = 5,
    SingularSystem = 6,
    IndexOutOfRange = 7,
    InsufficientRows = 8,
    InsufficientSamples = 9,
    InvalidArgument = 10,
    Panic = 11,
}

/// A dense column-major matrix.
pub struct OlsMatrix(DenseMatrix);

/// An orthogonal basis of a design matrix, reusable across responses.
pub struct OlsBasis {
    x: DenseMatrix,
    basis: SgsoBasis,
}

/// The left generalized inverse of a design matrix.
pub struct OlsPinv(PseudoInverse);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: OlsStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Dimension(_) | Error::Parse { .. } | Error::Io(_) => OlsStatus::Dimension,
            Error::NonFinite { .. } => OlsStatus::NonFinite,
            Error::RankDeficient { .. } => OlsStatus::RankDeficient,
            Error::NotSymmetric { .. } => OlsStatus::NotSymmetric,
            Error::SingularSystem { .. } => OlsStatus::SingularSystem,
            Error::IndexOutOfRange { .. } => OlsStatus::IndexOutOfRange,
            Error::InsufficientRows { .. } => OlsStatus::InsufficientRows,
            Error::InsufficientSamples { .. } => OlsStatus::InsufficientSamples,
            Error::InvalidArgument(_) => OlsStatus::InvalidArgument,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn null(what: &str) -> Failure {
    Failure {
        status: OlsStatus::NullPointer,
        message: format!("{what} is NULL"),
    }
}

fn set_last_error(message: Option<String>) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = message.map(|m| {
            CString::new(m.replace('\0', " ")).expect("interior NUL removed")
        });
    });
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            OlsStatus::Ok
        }
        Ok(Err(fail)) => {
            set_last_error(Some(fail.message));
            fail.status
        }
        Err(_) => {
            set_last_error(Some("internal panic".into()));
            OlsStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be NULL or valid for `len` reads.
unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be NULL or valid for `len` writes.
unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// # Safety
/// `p` must be NULL or point to a live handle.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn check_out_len(got: usize, want: usize, what: &str) -> Result<(), Failure> {
    if got != want {
        return Err(Error::Dimension(format!("{what} has length {got}, expected {want}")).into());
    }
    Ok(())
}

fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    // SAFETY: checked non-null; caller provides a writable slot.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message for the last failed call on this thread, or NULL after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ols_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn ols_status_string(status: OlsStatus) -> *const c_char {
    let s: &'static CStr = match status {
        OlsStatus::Ok => c"ok",
        OlsStatus::NullPointer => c"null pointer",
        OlsStatus::Dimension => c"dimension mismatch",
        OlsStatus::NonFinite => c"non-finite value",
        OlsStatus::RankDeficient => c"rank deficient",
        OlsStatus::NotSymmetric => c"weight matrix not symmetric",
        OlsStatus::SingularSystem => c"singular system",
        OlsStatus::IndexOutOfRange => c"index out of range",
        OlsStatus::InsufficientRows => c"insufficient rows",
        OlsStatus::InsufficientSamples => c"insufficient samples",
        OlsStatus::InvalidArgument => c"invalid argument",
        OlsStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Copies `rows * cols` column-major values into a new matrix.
///
/// # Safety
/// `data` must be valid for `rows * cols` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ols_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut OlsMatrix,
) -> OlsStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure::from(Error::Dimension("rows * cols overflows".into())))?;
        let d = input(data, len, "data")?;
        let m = DenseMatrix::from_col_major(rows, cols, d.to_vec())?;
        m.check_finite()?;
        store(out, OlsMatrix(m))
    })
}

/// # Safety
/// `m` must be NULL or a handle from [`ols_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ols_matrix_free(m: *mut OlsMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ols_matrix_rows(m: *const OlsMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.nrows())
}

/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ols_matrix_cols(m: *const OlsMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.ncols())
}

/// Least-squares fit. `beta` receives `cols + intercept` values, intercept
/// first; `rss` may be NULL.
///
/// # Safety
/// `x` must be a live handle, `y` valid for `n` reads, `beta` for `beta_len`
/// writes, and `rss` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ols_fit(
    x: *const OlsMatrix,
    y: *const f64,
    n: usize,
    intercept: bool,
    beta: *mut f64,
    beta_len: usize,
    rss: *mut f64,
) -> OlsStatus {
    guard(|| {
        let x = &handle(x, "x")?.0;
        let y = input(y, n, "y")?;
        let out = output(beta, beta_len, "beta")?;
        let r = fit(x, y, intercept)?;
        check_out_len(beta_len, r.beta.len(), "beta")?;
        out.copy_from_slice(&r.beta);
        if !rss.is_null() {
            *rss = r.rss;
        }
        Ok(())
    })
}

/// Orthogonalizes the columns of `x`; `pivot_floor <= 0` selects the default.
///
/// # Safety
/// `x` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ols_basis_new(
    x: *const OlsMatrix,
    pivot_floor: f64,
    out: *mut *mut OlsBasis,
) -> OlsStatus {
    guard(|| {
        let x = handle(x, "x")?.0.clone();
        let floor = if pivot_floor > 0.0 {
            pivot_floor
        } else {
            olsform::DEFAULT_PIVOT_FLOOR
        };
        let basis = sgso(&x, floor)?;
        store(out, OlsBasis { x, basis })
    })
}

/// # Safety
/// `b` must be NULL or a handle from [`ols_basis_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ols_basis_free(b: *mut OlsBasis) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Coefficient `index` (1-based) for response `y`.
///
/// # Safety
/// `b` must be a live handle, `y` valid for `n` reads, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ols_basis_coeff(
    b: *const OlsBasis,
    index: usize,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> OlsStatus {
    guard(|| {
        let b = handle(b, "basis")?;
        let y = input(y, n, "y")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = coeff_single(index, &b.x, y, &b.basis)?;
        Ok(())
    })
}

/// All coefficients for response `y`.
///
/// # Safety
/// `b` must be a live handle, `y` valid for `n` reads, `beta` for `beta_len`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn ols_basis_coeffs(
    b: *const OlsBasis,
    y: *const f64,
    n: usize,
    beta: *mut f64,
    beta_len: usize,
) -> OlsStatus {
    guard(|| {
        let b = handle(b, "basis")?;
        let y = input(y, n, "y")?;
        let out = output(beta, beta_len, "beta")?;
        check_out_len(beta_len, b.x.ncols(), "beta")?;
        out.copy_from_slice(&coeffs_projected(&b.x, y, &b.basis)?);
        Ok(())
    })
}

/// Left generalized inverse of the basis' design matrix.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ols_pinv_new(b: *const OlsBasis, out: *mut *mut OlsPinv) -> OlsStatus {
    guard(|| {
        let b = handle(b, "basis")?;
        store(out, OlsPinv(generalized_inverse_from_basis(&b.x, &b.basis)))
    })
}

/// # Safety
/// `p` must be NULL or a handle from [`ols_pinv_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ols_pinv_free(p: *mut OlsPinv) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copies the `p × n` inverse into `data`, column-major.
///
/// # Safety
/// `p` must be a live handle and `data` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ols_pinv_copy(p: *const OlsPinv, data: *mut f64, len: usize) -> OlsStatus {
    guard(|| {
        let m = handle(p, "pinv")?.0.to_matrix();
        let out = output(data, len, "data")?;
        check_out_len(len, m.as_col_major().len(), "data")?;
        out.copy_from_slice(m.as_col_major());
        Ok(())
    })
}

/// Precision-matrix element `s^{ij}` (1-based).
///
/// # Safety
/// `p` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ols_precision_element(
    p: *const OlsPinv,
    i: usize,
    j: usize,
    out: *mut f64,
) -> OlsStatus {
    guard(|| {
        let p = handle(p, "pinv")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = precision_element(i, j, &p.0)?;
        Ok(())
    })
}

/// Weighted coefficients for a symmetric `n × n` weight matrix `w`.
///
/// # Safety
/// `x` and `w` must be live handles, `y` valid for `n` reads, `beta` for
/// `beta_len` writes.
#[no_mangle]
pub unsafe extern "C" fn ols_weighted_coeffs(
    x: *const OlsMatrix,
    w: *const OlsMatrix,
    y: *const f64,
    n: usize,
    beta: *mut f64,
    beta_len: usize,
) -> OlsStatus {
    guard(|| {
        let x = &handle(x, "x")?.0;
        let w = &handle(w, "w")?.0;
        let y = input(y, n, "y")?;
        let out = output(beta, beta_len, "beta")?;
        check_out_len(beta_len, x.ncols(), "beta")?;
        let wb = weighted_sgso(x, w, olsform::DEFAULT_PIVOT_FLOOR)?;
        out.copy_from_slice(&weighted_coeffs(x, y, &wb)?);
        Ok(())
    })
}

/// Interaction coefficient and t-statistic for one locus pair.
///
/// # Safety
/// `g_i`, `g_j` and `pheno` must be valid for `m` reads; `beta3` and `tstat`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ols_interaction_stat(
    g_i: *const f64,
    g_j: *const f64,
    pheno: *const f64,
    m: usize,
    beta3: *mut f64,
    tstat: *mut f64,
) -> OlsStatus {
    guard(|| {
        let (gi, gj, p) = (input(g_i, m, "g_i")?, input(g_j, m, "g_j")?, input(pheno, m, "pheno")?);
        if beta3.is_null() || tstat.is_null() {
            return Err(null("beta3/tstat"));
        }
        let s = olsform::interaction_stat(gi, gj, p)?;
        *beta3 = s.beta3;
        *tstat = s.tstat;
        Ok(())
    })
}

/// Permutation p-value for one locus pair, `n_perm` permutations from `seed`.
///
/// # Safety
/// `g_i`, `g_j` and `pheno` must be valid for `m` reads; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ols_permutation_pvalue(
    g_i: *const f64,
    g_j: *const f64,
    pheno: *const f64,
    m: usize,
    n_perm: usize,
    seed: u64,
    out: *mut f64,
) -> OlsStatus {
    guard(|| {
        let (gi, gj, p) = (input(g_i, m, "g_i")?, input(g_j, m, "g_j")?, input(pheno, m, "pheno")?);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = InteractionModel::new(gi, gj)?.pvalue(p, n_perm, seed)?;
        Ok(())
    })
}
