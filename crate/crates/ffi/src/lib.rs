//! C ABI for the e2e-energy simulator.
//!
//! Configs and scenario models are opaque heap handles released with their
//! `_free` function. Fallible calls return an [`E2eStatus`] and write results
//! through out-pointers; the message of the last failure on the calling
//! thread is available from [`e2e_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use e2e_energy::channel::{fejer_kernel, pathloss_winner_b5a};
use e2e_energy::config::{lambertian_order, load_config, parse_config};
use e2e_energy::metrics::{required_sinr, snr_macro};
use e2e_energy::power::{pa_power_classb, pa_power_doherty};
use e2e_energy::scenario::{build_scenario, solve_rate_point, ScenarioModel, Variant};
use e2e_energy::{ConfigBundle, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum E2eStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    Domain = 5,
    Saturation = 6,
    Io = 7,
    Panic = 8,
}

/// Opaque parameter bundle.
pub struct E2eConfig(ConfigBundle);

/// Opaque wired scenario.
pub struct E2eModel(ScenarioModel);

/// One solved rate point. Power fields are NaN when `feasible` is false.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E2ePoint {
    pub feasible: bool,
    pub total_power_w: f64,
    pub ee: f64,
    pub p_mbs_w: f64,
    pub p_bmaa_w: f64,
    pub p_iap_w: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> E2eStatus {
    match e {
        Error::Parse { .. } | Error::Csv(_) | Error::Table(_) => E2eStatus::Parse,
        Error::Validation { .. } => E2eStatus::Validation,
        Error::Saturation { .. } => E2eStatus::Saturation,
        Error::Io { .. } => E2eStatus::Io,
        Error::Sweep(_) | Error::GridMismatch(_) | Error::LengthMismatch(_) => E2eStatus::InvalidArgument,
        _ => E2eStatus::Domain,
    }
}

fn guard(f: impl FnOnce() -> Result<(), E2eStatus>) -> E2eStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => E2eStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            E2eStatus::Panic
        }
    }
}

fn fail(e: Error) -> E2eStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, E2eStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(E2eStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        E2eStatus::InvalidArgument
    })
}

fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, E2eStatus> {
    // SAFETY: callers pass either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| {
        set_error("output pointer is null");
        E2eStatus::NullPointer
    })
}

fn write_f64(out: *mut f64, r: e2e_energy::Result<f64>) -> E2eStatus {
    guard(|| {
        let slot = out_arg(out)?;
        *slot = r.map_err(fail)?;
        Ok(())
    })
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn e2e_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Default parameter bundle.
///
/// # Safety
/// `out` must be null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn e2e_config_default(out: *mut *mut E2eConfig) -> E2eStatus {
    guard(|| {
        let slot = out_arg(out)?;
        *slot = Box::into_raw(Box::new(E2eConfig(ConfigBundle::default())));
        Ok(())
    })
}

/// Load and validate a config file; environment overrides apply.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn e2e_config_load(path: *const c_char, out: *mut *mut E2eConfig) -> E2eStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let slot = out_arg(out)?;
        let b = load_config(path).map_err(fail)?;
        *slot = Box::into_raw(Box::new(E2eConfig(b)));
        Ok(())
    })
}

/// Parse config text and validate it.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn e2e_config_parse(text: *const c_char, out: *mut *mut E2eConfig) -> E2eStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let slot = out_arg(out)?;
        let b = parse_config(text, "<ffi>").map_err(fail)?;
        b.validate().map_err(fail)?;
        *slot = Box::into_raw(Box::new(E2eConfig(b)));
        Ok(())
    })
}

/// Set `section.key` from its textual value. The bundle is validated when a
/// model is built.
///
/// # Safety
/// `cfg` must come from this library; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn e2e_config_set(
    cfg: *mut E2eConfig,
    section: *const c_char,
    key: *const c_char,
    value: *const c_char,
) -> E2eStatus {
    guard(|| {
        let cfg = out_arg(cfg)?;
        let section = str_arg(section, "section")?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        cfg.0.set(section, key, value).map_err(|msg| {
            set_error(format!("{section}.{key}: {msg}"));
            E2eStatus::InvalidArgument
        })
    })
}

/// # Safety
/// `cfg` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn e2e_config_free(cfg: *mut E2eConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Wire a scenario. `variant` such as `sep-lifi@128` overrides the
/// configured separation, access kind and M_T; pass null to keep them.
///
/// # Safety
/// `cfg` must come from this library; `variant` null or NUL-terminated;
/// `out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn e2e_model_build(
    cfg: *const E2eConfig,
    variant: *const c_char,
    seed: u64,
    out: *mut *mut E2eModel,
) -> E2eStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else {
            set_error("config is null");
            return Err(E2eStatus::NullPointer);
        };
        let slot = out_arg(out)?;
        let bundle = if variant.is_null() {
            cfg.0.clone()
        } else {
            let label = str_arg(variant, "variant")?;
            Variant::parse_with_default(label, cfg.0.scenario.m_t)
                .map_err(fail)?
                .apply(&cfg.0)
        };
        let model = build_scenario(&bundle, seed).map_err(fail)?;
        *slot = Box::into_raw(Box::new(E2eModel(model)));
        Ok(())
    })
}

/// Solve one offered total rate in bit/s. Infeasibility is reported through
/// `out.feasible`, not the status.
///
/// # Safety
/// `model` must come from this library; `out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn e2e_model_solve(model: *const E2eModel, total_rate: f64, out: *mut E2ePoint) -> E2eStatus {
    guard(|| {
        let Some(model) = model.as_ref() else {
            set_error("model is null");
            return Err(E2eStatus::NullPointer);
        };
        let slot = out_arg(out)?;
        let p = solve_rate_point(&model.0, total_rate).map_err(fail)?;
        let b = p.outcome.as_ref().ok();
        *slot = E2ePoint {
            feasible: p.feasible(),
            total_power_w: p.total_power().unwrap_or(f64::NAN),
            ee: p.ee().unwrap_or(f64::NAN),
            p_mbs_w: b.map_or(f64::NAN, |b| b.p_mbs()),
            p_bmaa_w: b.map_or(f64::NAN, |b| b.p_bmaa()),
            p_iap_w: b.map_or(f64::NAN, |b| b.p_iap()),
        };
        Ok(())
    })
}

/// # Safety
/// `model` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn e2e_model_free(model: *mut E2eModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub extern "C" fn e2e_fejer_kernel(m: usize, x: f64) -> f64 {
    fejer_kernel(m, x)
}

#[no_mangle]
pub extern "C" fn e2e_required_sinr(se: f64, gamma: f64) -> f64 {
    required_sinr(se, gamma)
}

#[no_mangle]
pub extern "C" fn e2e_snr_macro(beta: f64, m_t: usize, m_r: usize, p_sig: f64, sigma2: f64) -> f64 {
    snr_macro(beta, m_t, m_r, p_sig, sigma2).value
}

/// # Safety
/// `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn e2e_pathloss_winner_b5a(d: f64, f_c_ghz: f64, out: *mut f64) -> E2eStatus {
    write_f64(out, pathloss_winner_b5a(d, f_c_ghz))
}

/// # Safety
/// `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn e2e_lambertian_order(half_angle: f64, out: *mut f64) -> E2eStatus {
    write_f64(out, lambertian_order(half_angle))
}

/// # Safety
/// `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn e2e_pa_power_doherty(p_out: f64, p_max: f64, out: *mut f64) -> E2eStatus {
    write_f64(out, pa_power_doherty(p_out, p_max))
}

/// # Safety
/// `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn e2e_pa_power_classb(p_out: f64, p_max: f64, out: *mut f64) -> E2eStatus {
    write_f64(out, pa_power_classb(p_out, p_max))
}
