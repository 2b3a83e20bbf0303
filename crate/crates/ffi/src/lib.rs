//! C ABI for the `bamp` amputation library.
//!
//! Every function returns a [`BampStatus`]. On failure a message is kept
//! per thread and can be read with [`bamp_last_error`]. Copulas are opaque
//! [`BampCopula`] handles built from a TOML table and released with
//! [`bamp_copula_free`]. Matrices are dense and row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use bamp::analytics;
use bamp::engine;
use bamp::model;
use bamp::{CompleteDataset, Copula, CopulaSpec, Error, MissProbMatrix};
use nalgebra::DMatrix;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BampStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    /// No exact evaluation exists; use Monte Carlo.
    UseMonteCarlo = 4,
    Parse = 5,
    Numerical = 6,
    Panic = 7,
}

/// Opaque copula handle.
pub struct BampCopula {
    inner: Copula,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: BampStatus, msg: impl Into<String>) -> BampStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> BampStatus {
    let status = match &e {
        Error::Invalid { .. } => BampStatus::InvalidArgument,
        Error::DimensionMismatch(_) => BampStatus::DimensionMismatch,
        Error::UseMonteCarlo(_) => BampStatus::UseMonteCarlo,
        Error::Config(_) | Error::Csv { .. } => BampStatus::Parse,
        _ => BampStatus::Numerical,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), BampStatus>) -> BampStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BampStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(BampStatus::Panic, "internal panic"),
    }
}

unsafe fn slice_in<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], BampStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(BampStatus::NullPointer, format!("{name} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], BampStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(BampStatus::NullPointer, format!("{name} is null")));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a>(c: *const BampCopula) -> Result<&'a Copula, BampStatus> {
    c.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| fail(BampStatus::NullPointer, "copula handle is null"))
}

unsafe fn write<T>(p: *mut T, v: T, name: &str) -> Result<(), BampStatus> {
    if p.is_null() {
        return Err(fail(BampStatus::NullPointer, format!("{name} is null")));
    }
    p.write(v);
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bamp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Build a copula from a TOML table, e.g.
/// `family = "homogeneous-gauss"\nrho = 0.5\ndim = 3`.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bamp_copula_from_toml(toml: *const c_char, out: *mut *mut BampCopula) -> BampStatus {
    guard(|| {
        if toml.is_null() {
            return Err(fail(BampStatus::NullPointer, "toml is null"));
        }
        if out.is_null() {
            return Err(fail(BampStatus::NullPointer, "out is null"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|_| fail(BampStatus::Parse, "toml is not UTF-8"))?;
        let spec: CopulaSpec =
            ::toml::from_str(text).map_err(|e| fail(BampStatus::Parse, e.to_string()))?;
        let inner = Copula::new(spec).map_err(from_error)?;
        out.write(Box::into_raw(Box::new(BampCopula { inner })));
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `c` must come from [`bamp_copula_from_toml`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bamp_copula_free(c: *mut BampCopula) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Dimension of the copula, 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bamp_copula_dim(c: *const BampCopula) -> usize {
    c.as_ref().map_or(0, |h| h.inner.dim())
}

/// `C(u)`.
///
/// # Safety
/// `point` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bamp_copula_cdf(
    c: *const BampCopula,
    point: *const f64,
    len: usize,
    out: *mut f64,
) -> BampStatus {
    guard(|| {
        let cop = handle(c)?;
        let u = slice_in(point, len, "point")?;
        let v = cop.cdf(u).map_err(from_error)?;
        write(out, v, "out")
    })
}

/// `P(U_1 > 1 − u_1, …)`, i.e. the joint probability that every selected
/// indicator is 1 when `u` holds the marginal probabilities.
///
/// # Safety
/// `point` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bamp_copula_survival_cdf(
    c: *const BampCopula,
    point: *const f64,
    len: usize,
    out: *mut f64,
) -> BampStatus {
    guard(|| {
        let cop = handle(c)?;
        let u = slice_in(point, len, "point")?;
        let v = cop.survival_cdf(u).map_err(from_error)?;
        write(out, v, "out")
    })
}

/// Draw `n_rows` rows into `out` (`n_rows × dim`, row-major).
///
/// # Safety
/// `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bamp_copula_sample(
    c: *const BampCopula,
    n_rows: usize,
    seed: u64,
    out: *mut f64,
    out_len: usize,
) -> BampStatus {
    guard(|| {
        let cop = handle(c)?;
        if out_len != n_rows * cop.dim() {
            return Err(fail(
                BampStatus::DimensionMismatch,
                format!("out_len {out_len}, expected {}", n_rows * cop.dim()),
            ));
        }
        let dst = slice_out(out, out_len, "out")?;
        let sample = cop.sample(n_rows, seed).map_err(from_error)?;
        dst.copy_from_slice(sample.as_slice());
        Ok(())
    })
}

/// Ampute an `n × d` matrix with iid rows from `c`. `probs` is `n × d`;
/// `mask_out` receives 1 for missing cells and 0 otherwise.
///
/// # Safety
/// `data`, `probs` and `mask_out` must each hold `n * d` elements.
#[no_mangle]
pub unsafe extern "C" fn bamp_ampute_rows_iid(
    c: *const BampCopula,
    data: *const f64,
    probs: *const f64,
    n: usize,
    d: usize,
    seed: u64,
    mask_out: *mut u8,
) -> BampStatus {
    guard(|| {
        let cop = handle(c)?;
        let y = slice_in(data, n * d, "data")?;
        let p = slice_in(probs, n * d, "probs")?;
        let m = slice_out(mask_out, n * d, "mask_out")?;
        let names = (1..=d).map(|j| format!("V{j}")).collect();
        let y = CompleteDataset::new(names, DMatrix::from_row_slice(n, d, y)).map_err(from_error)?;
        let p = MissProbMatrix::new(DMatrix::from_row_slice(n, d, p)).map_err(from_error)?;
        let amp = engine::ampute_rows_iid(&y, &p, cop, seed).map_err(from_error)?;
        for i in 0..n {
            for j in 0..d {
                m[i * d + j] = amp.mask.get(i, j) as u8;
            }
        }
        Ok(())
    })
}

/// Correlation of two indicators with marginal probabilities `p1`, `p2`
/// joined by the bivariate copula `c`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bamp_pairwise_correlation(
    c: *const BampCopula,
    p1: f64,
    p2: f64,
    out: *mut f64,
) -> BampStatus {
    guard(|| {
        let cop = handle(c)?;
        let v = analytics::pairwise_correlation(cop, p1, p2).map_err(from_error)?;
        write(out, v, "out")
    })
}

/// Attainable correlation range of two indicators.
///
/// # Safety
/// `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bamp_correlation_bounds(p1: f64, p2: f64, lo: *mut f64, hi: *mut f64) -> BampStatus {
    guard(|| {
        let (a, b) = analytics::correlation_bounds(p1, p2).map_err(from_error)?;
        write(lo, a, "lo")?;
        write(hi, b, "hi")
    })
}

/// Logistic coefficients whose probabilities span `[p − eps, p + eps]`
/// over covariates in `[cmin, cmax]`, with `k` covariates.
///
/// # Safety
/// `beta0` and `beta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bamp_implied_coefficients(
    p: f64,
    eps: f64,
    cmin: f64,
    cmax: f64,
    k: usize,
    beta0: *mut f64,
    beta: *mut f64,
) -> BampStatus {
    guard(|| {
        let (b0, b) = model::implied_coefficients(p, eps, cmin, cmax, k).map_err(from_error)?;
        write(beta0, b0, "beta0")?;
        write(beta, b, "beta")
    })
}
