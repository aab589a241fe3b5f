//! C interface to the triphonon simulator.
//!
//! Every function returns a [`TpStatus`]; results come back through out
//! pointers. On failure `tp_last_error` holds a message for the calling thread.
//! Units follow the library: kHz, ms, mV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use triphonon::dynamics::{return_probability, Site};
use triphonon::experiment::{default_fringe_delays, run_berry};
use triphonon::model::{eigensystem, mode_frequencies, Band, ModelParams};
use triphonon::paths::{build_path_pair, discrete_berry_phase, PathFamily, ShimPath, SpeedProfile};
use triphonon::{CurvatureModel, FrequencyModel, ShimPoint};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Panic = 4,
}

/// Path family codes accepted by [`tp_run_berry`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpFamily {
    Canonical = 0,
    Larger = 1,
    Smaller = 2,
    Wavy = 3,
    MultiLoop = 4,
}

/// Opaque model handle.
pub struct TpModel {
    freq: FrequencyModel,
    curv: CurvatureModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(TpStatus, String);

impl From<triphonon::Error> for Fail {
    fn from(e: triphonon::Error) -> Self {
        use triphonon::Error::*;
        let status = match e {
            InvalidGeometry(_) | InvalidInput(_) | InvalidSchedule(_) | InvalidPath(_) | SingularParameter(_)
            | DegeneratePath(..) | NotNormalized(_) => TpStatus::InvalidArgument,
            _ => TpStatus::Numerical,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TpStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(TpStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            TpStatus::Panic
        }
    }
}

unsafe fn model_ref<'a>(m: *const TpModel) -> Result<&'a TpModel, Fail> {
    m.as_ref().ok_or_else(|| null("model"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn band(b: u32) -> Result<Band, Fail> {
    Band::try_from(b as u8).map_err(|_| invalid(format!("band must be 1, 2 or 3, got {b}")))
}

fn model_from(params: ModelParams) -> Result<TpModel, Fail> {
    Ok(TpModel { freq: params.frequency_model()?, curv: params.curvature_model()? })
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn tp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tp_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!(),
    };
    V.as_ptr()
}

/// Model with the fitted default parameters. Free with [`tp_model_free`].
///
/// # Safety
/// `out` must be a valid pointer or NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_model_default(out: *mut *mut TpModel) -> TpStatus {
    guard(|| {
        let slot = unsafe { self::out(out, "out")? };
        *slot = Box::into_raw(Box::new(model_from(ModelParams::default())?));
        Ok(())
    })
}

/// Model from f_R (kHz), Δf (kHz), c (1/mV) and α. Free with [`tp_model_free`].
///
/// # Safety
/// `out` must be a valid pointer or NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_model_create(
    f_r_khz: f64,
    delta_f_khz: f64,
    c_per_mv: f64,
    alpha: f64,
    out: *mut *mut TpModel,
) -> TpStatus {
    guard(|| {
        let slot = unsafe { self::out(out, "out")? };
        if (alpha.abs() - 1.0).abs() < 1e-12 {
            return Err(triphonon::Error::SingularParameter(alpha).into());
        }
        let params = ModelParams { f_r_khz, delta_f_khz, c_per_mv, alpha, ..ModelParams::default() };
        *slot = Box::into_raw(Box::new(model_from(params)?));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `tp_model_create`/`tp_model_default` and not be freed twice. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn tp_model_free(model: *mut TpModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Sorted eigenvalues (units of Δk) into `values[3]`, and eigenvectors row-major
/// into `vectors[9]` (row j = band j+1, columns A, B, C). `vectors` may be NULL.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn tp_eigensystem(
    model: *const TpModel,
    s_a: f64,
    s_b: f64,
    values: *mut f64,
    vectors: *mut f64,
) -> TpStatus {
    guard(|| {
        let m = unsafe { model_ref(model)? };
        if values.is_null() {
            return Err(null("values"));
        }
        if !s_a.is_finite() || !s_b.is_finite() {
            return Err(invalid("shims must be finite"));
        }
        let ms = eigensystem(&m.curv, ShimPoint::new(s_a, s_b));
        unsafe { std::slice::from_raw_parts_mut(values, 3) }.copy_from_slice(&ms.delta_k_values);
        if !vectors.is_null() {
            let v = unsafe { std::slice::from_raw_parts_mut(vectors, 9) };
            for (j, row) in ms.eigenvectors.iter().enumerate() {
                v[3 * j..3 * j + 3].copy_from_slice(row);
            }
        }
        Ok(())
    })
}

/// Mode frequencies (kHz, ascending) at shim voltage `dv_a_mv` into `out[3]`.
///
/// # Safety
/// `out` must be valid for 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn tp_mode_frequencies(model: *const TpModel, dv_a_mv: f64, out: *mut f64) -> TpStatus {
    guard(|| {
        let m = unsafe { model_ref(model)? };
        if out.is_null() {
            return Err(null("out"));
        }
        if !dv_a_mv.is_finite() {
            return Err(invalid("dv_a_mv must be finite"));
        }
        let f = mode_frequencies(&m.freq, dv_a_mv);
        unsafe { std::slice::from_raw_parts_mut(out, 3) }.copy_from_slice(&f);
        Ok(())
    })
}

/// Probability that a phonon prepared at `site` (0 = A, 1 = B, 2 = C) is found there after `t_ms`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tp_return_probability(
    model: *const TpModel,
    s_a: f64,
    s_b: f64,
    t_ms: f64,
    site: u32,
    out: *mut f64,
) -> TpStatus {
    guard(|| {
        let m = unsafe { model_ref(model)? };
        let slot = unsafe { self::out(out, "out")? };
        let site = match site {
            0 => Site::A,
            1 => Site::B,
            2 => Site::C,
            _ => return Err(invalid(format!("site must be 0, 1 or 2, got {site}"))),
        };
        if !(t_ms >= 0.0) || !t_ms.is_finite() || !s_a.is_finite() || !s_b.is_finite() {
            return Err(invalid("t_ms must be finite and non-negative, shims finite"));
        }
        *slot = return_probability(&m.curv, ShimPoint::new(s_a, s_b), t_ms, site);
        Ok(())
    })
}

/// Discrete geometric phase (radians, 0 or π for a real band) of `band` (1..3)
/// around the closed loop given by `n` waypoints in `s_a`, `s_b`. The last
/// waypoint must repeat the first.
///
/// # Safety
/// `s_a` and `s_b` must be valid for `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tp_discrete_berry_phase(
    model: *const TpModel,
    s_a: *const f64,
    s_b: *const f64,
    n: usize,
    band: u32,
    out: *mut f64,
) -> TpStatus {
    guard(|| {
        let m = unsafe { model_ref(model)? };
        let slot = unsafe { self::out(out, "out")? };
        if s_a.is_null() || s_b.is_null() {
            return Err(null("waypoints"));
        }
        let (xa, xb) = unsafe { (std::slice::from_raw_parts(s_a, n), std::slice::from_raw_parts(s_b, n)) };
        let wp = xa.iter().zip(xb).map(|(&a, &b)| ShimPoint::new(a, b)).collect();
        let path = ShimPath::new(&m.curv, wp, 1.0, PathFamily::Custom, SpeedProfile::default(), 0.05)?;
        *slot = discrete_berry_phase(&m.curv, &path, self::band(band)?)?.value;
        Ok(())
    })
}

/// Interferometric Berry measurement: builds the enclosing / non-enclosing pair
/// of `family` (a [`TpFamily`] code) with `waypoints` samples, runs each for `duration_ms`, and fits
/// the fringes. Writes |Δφ| (radians) and, if `populations` is non-NULL, the
/// final band populations as `[enc1, enc2, enc3, non1, non2, non3]`.
///
/// # Safety
/// `delta_phi` must be valid; `populations` NULL or valid for 6 doubles.
#[no_mangle]
pub unsafe extern "C" fn tp_run_berry(
    model: *const TpModel,
    family: u32,
    duration_ms: f64,
    waypoints: usize,
    delta_phi: *mut f64,
    populations: *mut f64,
) -> TpStatus {
    guard(|| {
        let m = unsafe { model_ref(model)? };
        let slot = unsafe { self::out(delta_phi, "delta_phi")? };
        if !(duration_ms > 0.0) || !duration_ms.is_finite() {
            return Err(invalid("duration_ms must be positive"));
        }
        let family = match family {
            f if f == TpFamily::Canonical as u32 => PathFamily::Canonical,
            f if f == TpFamily::Larger as u32 => PathFamily::Larger,
            f if f == TpFamily::Smaller as u32 => PathFamily::Smaller,
            f if f == TpFamily::Wavy as u32 => PathFamily::Wavy,
            f if f == TpFamily::MultiLoop as u32 => PathFamily::MultiLoop,
            f => return Err(invalid(format!("unknown family code {f}"))),
        };
        let pair = build_path_pair(&m.curv, family, duration_ms, waypoints)?;
        let delays = default_fringe_delays(&m.curv, pair.enclosing.start());
        let run = run_berry(&m.curv, &pair, &delays, 1.0)?;
        *slot = run.delta_phi;
        if !populations.is_null() {
            let p = unsafe { std::slice::from_raw_parts_mut(populations, 6) };
            p[..3].copy_from_slice(&run.populations[0]);
            p[3..].copy_from_slice(&run.populations[1]);
        }
        Ok(())
    })
}
