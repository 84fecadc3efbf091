//! C interface to `dgfc`.
//!
//! Every fallible call returns a [`DgfcStatus`]; on failure the message is
//! available from [`dgfc_last_error_message`] on the same thread. Objects
//! are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dgfc::forecast::{posterior_predictive, ForecastConfig, ForecastDraws};
use dgfc::gibbs::{run_chain, McmcConfig, ModelKind, PosteriorDraws};
use dgfc::linalg::Matrix;
use dgfc::scoring::crps_sample_sorted;
use dgfc::stationary::{DataKind, PriorHyper, TimeSeriesPanel};
use dgfc::DgfcError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgfcStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Numeric = 3,
    Io = 4,
    Panic = 5,
}

/// Observed panel.
pub struct DgfcPanel(TimeSeriesPanel);

/// Stored posterior draws.
pub struct DgfcDraws(PosteriorDraws);

/// Predictive sample, M draws × H horizons × n variables.
pub struct DgfcForecast(ForecastDraws);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &DgfcError) -> DgfcStatus {
    match e {
        DgfcError::Io(_) => DgfcStatus::Io,
        DgfcError::Origin { source, .. } => status_of(source),
        other if other.exit_code() == 2 => DgfcStatus::Validation,
        _ => DgfcStatus::Numeric,
    }
}

fn guard(f: impl FnOnce() -> Result<(), DgfcStatus>) -> DgfcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DgfcStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            DgfcStatus::Panic
        }
    }
}

fn fail(e: DgfcError) -> DgfcStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> DgfcStatus {
    set_error(&format!("{what} is null"));
    DgfcStatus::NullPointer
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn dgfc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dgfc_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!(),
    };
    VERSION.as_ptr()
}

/// Builds a panel from `t_len * n` row-major values. `kinds` holds one
/// entry per variable (0 continuous, 1 count) or may be null for all
/// continuous.
///
/// # Safety
/// `values` must point to `t_len * n` doubles and `kinds`, if not null, to
/// `n` bytes. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dgfc_panel_new(
    values: *const f64,
    t_len: usize,
    n: usize,
    kinds: *const u8,
    out: *mut *mut DgfcPanel,
) -> DgfcStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let v = std::slice::from_raw_parts(values, t_len * n);
        let kinds: Vec<DataKind> = if kinds.is_null() {
            vec![DataKind::Continuous; n]
        } else {
            let raw = std::slice::from_raw_parts(kinds, n);
            let mut ks = Vec::with_capacity(n);
            for &k in raw {
                ks.push(match k {
                    0 => DataKind::Continuous,
                    1 => DataKind::Count,
                    _ => return Err(fail(DgfcError::Validation(format!("unknown data kind {k}")))),
                });
            }
            ks
        };
        let names = (1..=n).map(|i| format!("y{i}")).collect();
        let panel = TimeSeriesPanel::new(Matrix::from_row_slice(t_len, n, v), names, kinds).map_err(fail)?;
        *out = Box::into_raw(Box::new(DgfcPanel(panel)));
        Ok(())
    })
}

/// # Safety
/// `panel` must come from [`dgfc_panel_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dgfc_panel_free(panel: *mut DgfcPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// Sampler settings for [`dgfc_fit`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DgfcFitOptions {
    pub total: usize,
    pub burn: usize,
    pub thin: usize,
    pub seed: u64,
    /// Factor count; 0 picks the default.
    pub k: usize,
    /// 0 factor model, 1 VAR copula.
    pub model: u32,
}

/// Default options: 10000 iterations, 5000 burn-in, thin 5, seed 0.
#[no_mangle]
pub extern "C" fn dgfc_fit_options_default() -> DgfcFitOptions {
    let m = McmcConfig::default();
    DgfcFitOptions {
        total: m.total,
        burn: m.burn,
        thin: m.thin,
        seed: m.seed,
        k: 0,
        model: 0,
    }
}

/// Runs the Gibbs sampler on a panel.
///
/// # Safety
/// `panel` must be a live handle and `opts`, `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dgfc_fit(
    panel: *const DgfcPanel,
    opts: *const DgfcFitOptions,
    out: *mut *mut DgfcDraws,
) -> DgfcStatus {
    guard(|| {
        if panel.is_null() {
            return Err(null("panel"));
        }
        if opts.is_null() {
            return Err(null("opts"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let p = &(*panel).0;
        let o = *opts;
        let model = match o.model {
            0 => ModelKind::Factor,
            1 => ModelKind::VarCopula,
            m => return Err(fail(DgfcError::Validation(format!("unknown model {m}")))),
        };
        let n = p.n_series();
        let k = match (o.k, model) {
            (0, ModelKind::VarCopula) => n,
            (0, ModelKind::Factor) => PriorHyper::default_k(n),
            (k, _) => k,
        };
        let mcmc = McmcConfig {
            seed: o.seed,
            model,
            ..McmcConfig::with_iterations(o.total, o.burn, o.thin)
        };
        let draws = run_chain(p, &PriorHyper::with_k(k), &mcmc).map_err(fail)?;
        *out = Box::into_raw(Box::new(DgfcDraws(draws)));
        Ok(())
    })
}

/// Number of stored draws; 0 for a null handle.
///
/// # Safety
/// `draws` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dgfc_draws_len(draws: *const DgfcDraws) -> usize {
    if draws.is_null() {
        0
    } else {
        (*draws).0.len()
    }
}

/// # Safety
/// `draws` must come from [`dgfc_fit`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dgfc_draws_free(draws: *mut DgfcDraws) {
    if !draws.is_null() {
        drop(Box::from_raw(draws));
    }
}

/// One predictive path per stored draw for horizons 1..=`horizons`.
///
/// # Safety
/// `draws` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dgfc_forecast(
    draws: *const DgfcDraws,
    horizons: usize,
    seed: u64,
    out: *mut *mut DgfcForecast,
) -> DgfcStatus {
    guard(|| {
        if draws.is_null() {
            return Err(null("draws"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let f = posterior_predictive(&(*draws).0, &ForecastConfig::new(horizons, seed)).map_err(fail)?;
        *out = Box::into_raw(Box::new(DgfcForecast(f)));
        Ok(())
    })
}

/// Writes the sample dimensions (draws, horizons, variables).
///
/// # Safety
/// `forecast` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn dgfc_forecast_dims(
    forecast: *const DgfcForecast,
    m: *mut usize,
    h: *mut usize,
    n: *mut usize,
) -> DgfcStatus {
    guard(|| {
        if forecast.is_null() || m.is_null() || h.is_null() || n.is_null() {
            return Err(null("argument"));
        }
        let f = &(*forecast).0;
        *m = f.n_draws();
        *h = f.horizons();
        *n = f.n();
        Ok(())
    })
}

/// Copies the sample into `buf`, laid out [draw][horizon][variable].
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dgfc_forecast_values(forecast: *const DgfcForecast, buf: *mut f64, len: usize) -> DgfcStatus {
    guard(|| {
        if forecast.is_null() {
            return Err(null("forecast"));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let v = (*forecast).0.values();
        if len < v.len() {
            return Err(fail(DgfcError::Validation(format!(
                "buffer holds {len} values, {} needed",
                v.len()
            ))));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// # Safety
/// `forecast` must come from [`dgfc_forecast`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dgfc_forecast_free(forecast: *mut DgfcForecast) {
    if !forecast.is_null() {
        drop(Box::from_raw(forecast));
    }
}

/// Sample CRPS of `len` draws against `obs`.
///
/// # Safety
/// `draws` must hold `len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn dgfc_crps_sample(draws: *const f64, len: usize, obs: f64, out: *mut f64) -> DgfcStatus {
    guard(|| {
        if draws.is_null() {
            return Err(null("draws"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = crps_sample_sorted(std::slice::from_raw_parts(draws, len), obs).map_err(fail)?;
        Ok(())
    })
}
