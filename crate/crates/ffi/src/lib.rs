//! C interface to `smoothball`.
//!
//! Functions return an [`SbStatus`]; results go through out-pointers. After a
//! non-`Ok` status, `sb_last_error()` describes the failure on the calling
//! thread. Handles are created by `*_new` and released by the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use smoothball::pathgen::{self, BasisSource, GridSpec, PathSource};
use smoothball::ratefit::{self, BetaMode};
use smoothball::rkhs::{self, CoefficientEllipsoid, EntropyOptions, GFunctionSpec};
use smoothball::smallball::{self, Norm, WeightedChiSquareSpec};
use smoothball::tsirelson::{self, BoundVariant, Convention, SpectrumType};
use smoothball::{Error, SpectralKind, SpectralModel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numeric = 3,
    Capacity = 4,
    Certificate = 5,
    Property = 6,
    Unsupported = 7,
    Io = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SbStatus {
    match err {
        Error::Precondition(_) | Error::Domain(_) => SbStatus::InvalidArgument,
        Error::Numeric { .. } => SbStatus::Numeric,
        Error::Capacity { .. } => SbStatus::Capacity,
        Error::Certificate { .. } => SbStatus::Certificate,
        Error::Property(_) => SbStatus::Property,
        Error::Unsupported(_) => SbStatus::Unsupported,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => SbStatus::Io,
    }
}

/// Runs `f`, turning errors and panics into a status and the thread's last error.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> SbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SbStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            SbStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside smoothball".into());
            SbStatus::Panic
        }
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

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Lib(Error::Precondition(msg.into()))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

fn opt(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn sb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Spectral measure.
pub struct SbModel {
    inner: SpectralModel,
}

/// Creates a model. `kind` is one of `continuous`, `discrete`, `bandlimited`,
/// `log-power`, `truncated`, `band-minorant`, `dirichlet-minorant`; pass NaN for
/// unused parameters.
///
/// # Safety
/// `kind` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_model_new(kind: *const c_char, nu: f64, alpha: f64, cutoff: f64, out_model: *mut *mut SbModel) -> SbStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        let kind: SpectralKind = text(kind, "kind")?.parse()?;
        let inner = SpectralModel::from_fields(kind, opt(nu), opt(alpha), opt(cutoff))?;
        *slot = Box::into_raw(Box::new(SbModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `sb_model_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sb_model_free(model: *mut SbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Covariance `R(t)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_model_covariance(model: *const SbModel, t: f64, out_value: *mut f64) -> SbStatus {
    guard(|| {
        let m = model.as_ref().ok_or(Failure::Null("model"))?;
        *out(out_value, "out_value")? = m.inner.covariance(t)?.value;
        Ok(())
    })
}

/// Total mass `R(0)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_model_total_mass(model: *const SbModel, out_value: *mut f64) -> SbStatus {
    guard(|| {
        let m = model.as_ref().ok_or(Failure::Null("model"))?;
        *out(out_value, "out_value")? = m.inner.total_mass();
        Ok(())
    })
}

/// Path generator bound to a model and an equally spaced grid on `[0, t_max]`.
pub struct SbSampler {
    inner: Box<dyn PathSource + Send>,
}

/// Creates a sampler. For the discrete family a nonnegative `truncation_k`
/// fixes the Fourier truncation; a negative value chooses it from the default
/// tail tolerance.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_sampler_new(
    model: *const SbModel,
    t_max: f64,
    n_points: usize,
    truncation_k: i64,
    out_sampler: *mut *mut SbSampler,
) -> SbStatus {
    guard(|| {
        let m = model.as_ref().ok_or(Failure::Null("model"))?;
        let slot = out(out_sampler, "out_sampler")?;
        let grid = GridSpec::new(0.0, t_max, n_points)?;
        let inner: Box<dyn PathSource + Send> = match (m.inner, truncation_k) {
            (SpectralModel::Discrete { .. }, k) if k >= 0 => Box::new(BasisSource::fourier(&m.inner, k as usize, grid)?),
            _ => pathgen::source_for(&m.inner, grid, pathgen::DEFAULT_TAIL_TOL)?,
        };
        *slot = Box::into_raw(Box::new(SbSampler { inner }));
        Ok(())
    })
}

/// # Safety
/// `sampler` must come from `sb_sampler_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sb_sampler_free(sampler: *mut SbSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Number of grid points of the sampler.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_sampler_len(sampler: *const SbSampler, out_len: *mut usize) -> SbStatus {
    guard(|| {
        let s = sampler.as_ref().ok_or(Failure::Null("sampler"))?;
        *out(out_len, "out_len")? = s.inner.grid().n_points;
        Ok(())
    })
}

/// Writes path `index` of stream `seed` into `values[0..len]`; `len` must equal
/// the number of grid points.
///
/// # Safety
/// `values` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sb_sampler_path(sampler: *const SbSampler, seed: u64, index: u64, values: *mut f64, len: usize) -> SbStatus {
    guard(|| {
        let s = sampler.as_ref().ok_or(Failure::Null("sampler"))?;
        let n = s.inner.grid().n_points;
        if len != n {
            return Err(invalid(format!("buffer holds {len} values, grid has {n}")));
        }
        let dst = slice_mut(values, len, "values")?;
        dst.copy_from_slice(&pathgen::sample(s.inner.as_ref(), seed, index).values);
        Ok(())
    })
}

/// One small-ball estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SbEstimate {
    pub r: f64,
    pub hits: u64,
    pub n_samples: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `+inf` without hits.
    pub phi_hat: f64,
    pub phi_lo: f64,
    pub phi_hi: f64,
}

/// Monte Carlo estimates of `P(‖X‖ ≤ r)` for each radius. `norm` is 0 for the
/// sup norm and 1 for the L2 norm.
///
/// # Safety
/// `radii` and `out_estimates` must hold `n_radii` elements.
#[no_mangle]
pub unsafe extern "C" fn sb_smallball_estimate(
    sampler: *const SbSampler,
    norm: u32,
    radii: *const f64,
    n_radii: usize,
    n_samples: usize,
    seed: u64,
    out_estimates: *mut SbEstimate,
) -> SbStatus {
    guard(|| {
        let s = sampler.as_ref().ok_or(Failure::Null("sampler"))?;
        let norm = match norm {
            0 => Norm::Sup,
            1 => Norm::L2,
            other => return Err(invalid(format!("norm code {other} is not 0 (sup) or 1 (l2)"))),
        };
        let radii = slice(radii, n_radii, "radii")?;
        let dst = slice_mut(out_estimates, n_radii, "out_estimates")?;
        let est = smallball::estimate(s.inner.as_ref(), norm, radii, n_samples, seed)?;
        for (d, e) in dst.iter_mut().zip(est) {
            *d = SbEstimate {
                r: e.r,
                hits: e.hits as u64,
                n_samples: e.n_samples as u64,
                p_hat: e.p_hat,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
                phi_hat: e.phi_hat,
                phi_lo: e.phi_lo,
                phi_hi: e.phi_hi,
            };
        }
        Ok(())
    })
}

/// Exact `P(‖X̃_ν‖_{L2} ≤ r)` for the periodic process truncated at `k`.
///
/// # Safety
/// `out_p` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_exact_l2(nu: f64, k: usize, r: f64, out_p: *mut f64) -> SbStatus {
    guard(|| {
        let slot = out(out_p, "out_p")?;
        *slot = smallball::exact_l2(&WeightedChiSquareSpec::periodic(nu, k)?, r)?;
        Ok(())
    })
}

/// `log P(‖X̃_ν‖_{L2} ≤ r)`, accurate deep in the tail.
///
/// # Safety
/// `out_log_p` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_log_exact_l2(nu: f64, k: usize, r: f64, out_log_p: *mut f64) -> SbStatus {
    guard(|| {
        let slot = out(out_log_p, "out_log_p")?;
        *slot = smallball::log_exact_l2(&WeightedChiSquareSpec::periodic(nu, k)?, r)?;
        Ok(())
    })
}

/// Minorant lower bound on `φ(r)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SbLowerBound {
    pub r: f64,
    pub l_used: f64,
    pub sigma2: f64,
    pub phi_lower: f64,
    pub valid: bool,
}

/// Best minorant bound. `discrete` selects the spectrum, `period_one` the
/// period-1 convention instead of the 2π one, `rigorous` the grid-count variant.
///
/// # Safety
/// `out_bound` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_tsirelson_bound_opt(
    nu: f64,
    discrete: bool,
    r: f64,
    period_one: bool,
    rigorous: bool,
    out_bound: *mut SbLowerBound,
) -> SbStatus {
    guard(|| {
        let slot = out(out_bound, "out_bound")?;
        let spectrum = if discrete { SpectrumType::Discrete } else { SpectrumType::Continuous };
        let convention = if period_one { Convention::Period1 } else { Convention::Paper2Pi };
        let variant = if rigorous { BoundVariant::RigorousGridCount } else { BoundVariant::PaperExponent };
        let b = tsirelson::bound_opt(nu, spectrum, r, convention, variant)?;
        *slot = SbLowerBound { r: b.r, l_used: b.l_used, sigma2: b.sigma2, phi_lower: b.phi_lower, valid: b.valid };
        Ok(())
    })
}

/// `ν/(π(ν+1)^{1+1/ν})`.
///
/// # Safety
/// `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_asymptotic_constant(nu: f64, out_value: *mut f64) -> SbStatus {
    guard(|| {
        *out(out_value, "out_value")? = tsirelson::asymptotic_constant(nu)?;
        Ok(())
    })
}

/// Lower and upper bounds on the sup-norm entropy of the periodic RKHS ball
/// truncated at `k` frequencies.
///
/// # Safety
/// Out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_entropy_bracket(nu: f64, k: usize, epsilon: f64, out_lower: *mut f64, out_upper: *mut f64) -> SbStatus {
    guard(|| {
        let lo = out(out_lower, "out_lower")?;
        let hi = out(out_upper, "out_upper")?;
        let ell = CoefficientEllipsoid::new(nu, k)?;
        let b = rkhs::entropy_bracket(&ell, epsilon, &EntropyOptions::default())?;
        *lo = b.h_lower;
        *hi = b.h_upper;
        Ok(())
    })
}

/// Certified properties of the product function `G`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SbGCertificate {
    pub c: f64,
    pub theta_g: f64,
    pub max_abs: f64,
    pub c_g: f64,
    pub decay_exponent: f64,
    pub bounded_by_one: bool,
    pub below_exp_growth: bool,
}

/// # Safety
/// `out_cert` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_g_certify(gamma: f64, t0: f64, t_max: f64, step: f64, out_cert: *mut SbGCertificate) -> SbStatus {
    guard(|| {
        let slot = out(out_cert, "out_cert")?;
        let c = rkhs::g_certify(&GFunctionSpec::new(gamma)?, t0, t_max, step)?;
        *slot = SbGCertificate {
            c: c.c,
            theta_g: c.theta_g,
            max_abs: c.max_abs,
            c_g: c.c_g,
            decay_exponent: c.decay_exponent,
            bounded_by_one: c.bounded_by_one,
            below_exp_growth: c.below_exp_growth,
        };
        Ok(())
    })
}

/// Rate fit `φ ≈ A|log r|^γ (log|log r|)^β`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SbRateFit {
    pub a: f64,
    pub gamma: f64,
    pub beta: f64,
    pub rss: f64,
    pub n_points: u64,
    /// No fit was made: too few points, too narrow a range, or collinear data.
    pub refused: bool,
}

/// Fits `n` points; `beta` is fixed unless it is NaN.
///
/// # Safety
/// `r` and `phi` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn sb_fit(r: *const f64, phi: *const f64, n: usize, beta: f64, out_fit: *mut SbRateFit) -> SbStatus {
    guard(|| {
        let slot = out(out_fit, "out_fit")?;
        let r = slice(r, n, "r")?;
        let phi = slice(phi, n, "phi")?;
        let points: Vec<(f64, f64)> = r.iter().copied().zip(phi.iter().copied()).collect();
        let mode = if beta.is_nan() { BetaMode::Free } else { BetaMode::Fixed(beta) };
        let f = ratefit::fit(&points, mode)?;
        *slot = SbRateFit {
            a: f.a.unwrap_or(f64::NAN),
            gamma: f.gamma.unwrap_or(f64::NAN),
            beta: f.beta.unwrap_or(f64::NAN),
            rss: f.rss.unwrap_or(f64::NAN),
            n_points: f.n_points as u64,
            refused: f.is_refused(),
        };
        Ok(())
    })
}
