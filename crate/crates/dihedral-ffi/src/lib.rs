//! C interface to `dihedral`.
//!
//! Objects are opaque handles created by `*_new`/`*_from_*` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`DhStatus`]; on failure a message is kept per thread and can be copied
//! out with [`dh_last_error`]. Output pointers are written only on success.

use dihedral::fixtures;
use dihedral::gm::{self, MarkovGibbsModel};
use dihedral::io::{distribution_from_json, model_from_json};
use dihedral::{Error, GroupDistribution, GroupElement};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    InvalidModel = 4,
    DimensionMismatch = 5,
    /// A numerical precondition failed (singular covariance, eigenvalue
    /// tie, condition (a)/(b)).
    Numerical = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Step distribution on G_d with f64 weights.
pub struct DhDistribution {
    inner: GroupDistribution<f64>,
}

/// Validated finite-state Markov model.
pub struct DhModel {
    inner: MarkovGibbsModel,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> DhStatus {
    match e {
        Error::DimensionMismatch { .. } => DhStatus::DimensionMismatch,
        Error::InvalidModel(_) => DhStatus::InvalidModel,
        Error::Json(_) | Error::InvalidWeight(_) => DhStatus::Parse,
        Error::ConditionA { .. }
        | Error::ConditionB { .. }
        | Error::SingularCovariance
        | Error::EigenTie(_)
        | Error::Perturbation(_) => DhStatus::Numerical,
        _ => DhStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (DhStatus, String)>) -> DhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DhStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            DhStatus::Panic
        }
    }
}

fn lib(e: Error) -> (DhStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (DhStatus, String) {
    (DhStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (DhStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (DhStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn element_arg(flip: i64, trans: *const i64, dim: usize) -> Result<GroupElement, (DhStatus, String)> {
    if dim > 0 && trans.is_null() {
        return Err(null("trans"));
    }
    let t = if dim == 0 { vec![] } else { std::slice::from_raw_parts(trans, dim).to_vec() };
    GroupElement::new(flip, t).map_err(lib)
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, need: usize) -> Result<&'a mut [f64], (DhStatus, String)> {
    if p.is_null() {
        return Err(null("out"));
    }
    if len < need {
        return Err((DhStatus::BufferTooSmall, format!("buffer holds {len} values, {need} needed")));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn dh_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parses a distribution JSON document (`{"dim", "atoms": [{flip, trans, w}]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_distribution_from_json(json: *const c_char, out: *mut *mut DhDistribution) -> DhStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = distribution_from_json(text).map_err(lib)?.to_f64();
        *out = Box::into_raw(Box::new(DhDistribution { inner }));
        Ok(())
    })
}

/// The bundled distribution `nu1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_distribution_nu1(out: *mut *mut DhDistribution) -> DhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(DhDistribution { inner: fixtures::nu1() }));
        Ok(())
    })
}

/// # Safety
/// `d` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dh_distribution_free(d: *mut DhDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn dh_distribution_dim(d: *const DhDistribution) -> usize {
    d.as_ref().map_or(0, |d| d.inner.dim())
}

/// `P(S_n = (flip, trans))` for the i.i.d. walk.
///
/// # Safety
/// `d` live; `trans` valid for `dim` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dh_rw_nstep_prob(
    d: *const DhDistribution,
    n: usize,
    flip: i64,
    trans: *const i64,
    dim: usize,
    out: *mut f64,
) -> DhStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("distribution"))?;
        let g = element_arg(flip, trans, dim)?;
        let p = dihedral::rw::nstep_prob(&d.inner, n, &g).map_err(lib)?;
        *out.as_mut().ok_or_else(|| null("out"))? = p;
        Ok(())
    })
}

/// `max |n^{d/2} P(S_n = (ε, r)) − Φ(r/√n)|` over `|r|_∞ ≤ radius`.
///
/// # Safety
/// `d` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dh_rw_lclt_deviation(d: *const DhDistribution, n: usize, radius: i64, out: *mut f64) -> DhStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("distribution"))?;
        if radius < 0 {
            return Err((DhStatus::InvalidArgument, "radius must be nonnegative".into()));
        }
        let v = dihedral::rw::lclt_deviation(&d.inner, n, radius).map_err(lib)?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// Fractions of `trials` sampled paths that return to e by each horizon.
///
/// # Safety
/// `d` live; `horizons` valid for `count` values; `out` valid for `count`.
#[no_mangle]
pub unsafe extern "C" fn dh_rw_return_fraction(
    d: *const DhDistribution,
    horizons: *const usize,
    count: usize,
    trials: usize,
    seed: u64,
    out: *mut f64,
) -> DhStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("distribution"))?;
        if count > 0 && horizons.is_null() {
            return Err(null("horizons"));
        }
        let h = if count == 0 { vec![] } else { std::slice::from_raw_parts(horizons, count).to_vec() };
        if trials == 0 {
            return Err((DhStatus::InvalidArgument, "trials must be positive".into()));
        }
        let r = dihedral::recurrence::return_fraction(&d.inner, &h, trials, seed).map_err(lib)?;
        out_slice(out, count, count)?.copy_from_slice(&r.fractions);
        Ok(())
    })
}

fn checked_model(m: MarkovGibbsModel) -> Result<*mut DhModel, (DhStatus, String)> {
    let report = gm::validate_model(&m);
    if !report.all_pass() {
        return Err((
            DhStatus::InvalidModel,
            format!("model fails: {}", report.failures().join(", ")),
        ));
    }
    Ok(Box::into_raw(Box::new(DhModel { inner: m })))
}

/// Parses and validates a model JSON document.
///
/// # Safety
/// `json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dh_model_from_json(json: *const c_char, out: *mut *mut DhModel) -> DhStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = checked_model(model_from_json(text).map_err(lib)?)?;
        Ok(())
    })
}

/// A bundled model by name: gm-bern, gm-markov, gm-period2, gm-d2, gm-d3.
///
/// # Safety
/// `name` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dh_model_fixture(name: *const c_char, out: *mut *mut DhModel) -> DhStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = fixtures::model(name).ok_or_else(|| (DhStatus::InvalidArgument, format!("unknown fixture {name:?}")))?;
        *out = checked_model(m)?;
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dh_model_free(m: *mut DhModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` live or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn dh_model_dim(m: *const DhModel) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// # Safety
/// `m` live or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn dh_model_states(m: *const DhModel) -> usize {
    m.as_ref().map_or(0, |m| m.inner.states())
}

/// `μ(ψ_n = (flip, trans))` by Fourier inversion.
///
/// # Safety
/// `m` live; `trans` valid for `dim` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dh_gm_nstep_prob(
    m: *const DhModel,
    n: usize,
    flip: i64,
    trans: *const i64,
    dim: usize,
    out: *mut f64,
) -> DhStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        let g = element_arg(flip, trans, dim)?;
        let p = gm::gm_nstep_prob(&m.inner, n, &g).map_err(lib)?;
        *out.as_mut().ok_or_else(|| null("out"))? = p;
        Ok(())
    })
}

/// Limit covariance Σ₁², written row-major into `out` (`d·d` values).
///
/// # Safety
/// `m` live; `out` valid for `len` values.
#[no_mangle]
pub unsafe extern "C" fn dh_gm_sigma1_sq(m: *const DhModel, out: *mut f64, len: usize) -> DhStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        let d = m.inner.dim();
        let dst = out_slice(out, len, d * d)?;
        let s = gm::sigma1_sq(&m.inner);
        for (i, row) in s.iter().enumerate() {
            dst[i * d..(i + 1) * d].copy_from_slice(row);
        }
        Ok(())
    })
}

/// First-return law `f[0..=n_max]` (`f[0] = 0`) by the exact taboo DP.
///
/// # Safety
/// `m` live; `out` valid for `len ≥ n_max + 1` values.
#[no_mangle]
pub unsafe extern "C" fn dh_gm_first_return(m: *const DhModel, n_max: usize, out: *mut f64, len: usize) -> DhStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        let dst = out_slice(out, len, n_max + 1)?;
        dst.copy_from_slice(&dihedral::renewal::taboo_pmf::<f64>(&m.inner, n_max));
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_mapping() {
        assert_eq!(status_of(&Error::SingularCovariance), DhStatus::Numerical);
        assert_eq!(
            status_of(&Error::DimensionMismatch { expected: 1, found: 2 }),
            DhStatus::DimensionMismatch
        );
        assert_eq!(status_of(&Error::NoFlip), DhStatus::InvalidArgument);
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, DhStatus::Panic);
        let n = unsafe { dh_last_error(ptr::null_mut(), 0) };
        assert_eq!(n, "internal panic".len());
    }
}
