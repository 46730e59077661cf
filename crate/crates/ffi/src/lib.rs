//! C interface to `swlab`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns a
//! [`SwlabStatus`] and leaves a message for [`swlab_last_error`] on failure.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use swlab::cli::{self, Command, EngineOverrides, LoadedModel, RunOptions};
use swlab::engine::{transform, EngineOptions, SwResult, Variant};
use swlab::models::{build_default, Preset};
use swlab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwlabStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8, undersized buffer or unknown name.
    InvalidArgument = 1,
    /// Spec, parameter or model validation failure.
    Validation = 2,
    /// A numerical guard tripped (resonance, small denominator, bin merge).
    Numerical = 3,
    /// An internal panic was caught.
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwlabVariant {
    BlockDiagonal = 0,
    SingleGenerator = 1,
    MatrixForm = 2,
}

impl From<SwlabVariant> for Variant {
    fn from(v: SwlabVariant) -> Variant {
        match v {
            SwlabVariant::BlockDiagonal => Variant::BlockDiagonal,
            SwlabVariant::SingleGenerator => Variant::SingleGenerator,
            SwlabVariant::MatrixForm => Variant::MatrixForm,
        }
    }
}

/// A model: `H0`, `V` and a block partition.
pub struct SwlabModel {
    model: LoadedModel,
}

/// Output of a transformation.
pub struct SwlabResult {
    result: SwResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SwlabStatus, msg: impl Into<String>) -> SwlabStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> SwlabStatus {
    let status = match cli::exit_code(&e) {
        cli::EXIT_NUMERICAL => SwlabStatus::Numerical,
        _ => SwlabStatus::Validation,
    };
    fail(status, e.to_string())
}

fn guarded(f: impl FnOnce() -> SwlabStatus) -> SwlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unexpected failure".into());
            fail(SwlabStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, SwlabStatus> {
    if p.is_null() {
        return Err(fail(SwlabStatus::InvalidArgument, format!("{what} is null")));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(SwlabStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn into_handle<T>(value: T, out: *mut *mut T) -> SwlabStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    SwlabStatus::Ok
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn swlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn swlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a model from a model-spec JSON document.
///
/// # Safety
/// `spec_json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn swlab_model_from_json(spec_json: *const c_char, out: *mut *mut SwlabModel) -> SwlabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SwlabStatus::InvalidArgument, "out is null");
        }
        let text = match unsafe { read_str(spec_json, "spec_json") } {
            Ok(t) => t,
            Err(s) => return s,
        };
        match cli::load_spec(text, EngineOverrides::default()).and_then(|s| s.build(None)) {
            Ok(model) => into_handle(SwlabModel { model }, out),
            Err(e) => from_error(e),
        }
    })
}

/// Builds a preset with default parameters.
///
/// # Safety
/// `name` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn swlab_model_preset(name: *const c_char, out: *mut *mut SwlabModel) -> SwlabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SwlabStatus::InvalidArgument, "out is null");
        }
        let name = match unsafe { read_str(name, "name") } {
            Ok(t) => t,
            Err(s) => return s,
        };
        let built = match Preset::from_name(name).and_then(build_default) {
            Ok(b) => b,
            Err(e) => return from_error(e),
        };
        let model = LoadedModel {
            space: built.space.clone(),
            h0: built.h0.clone(),
            v: built.v.clone(),
            recipe: built.blocks.clone(),
            margin: built.margin,
            warnings: built.warnings.clone(),
            built: Some(built),
        };
        into_handle(SwlabModel { model }, out)
    })
}

/// Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swlab_model_dim(model: *const SwlabModel) -> usize {
    unsafe { model.as_ref() }.map_or(0, |m| m.model.space.total_dim())
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn swlab_model_free(model: *mut SwlabModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Runs the transformation at the given order and variant.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn swlab_transform(
    model: *const SwlabModel,
    order: usize,
    variant: SwlabVariant,
    out: *mut *mut SwlabResult,
) -> SwlabStatus {
    guarded(|| {
        let Some(m) = (unsafe { model.as_ref() }) else {
            return fail(SwlabStatus::InvalidArgument, "model is null");
        };
        if out.is_null() {
            return fail(SwlabStatus::InvalidArgument, "out is null");
        }
        let opts = EngineOptions {
            order,
            variant: variant.into(),
            bin_tol: None,
        };
        match m.model.blocks().and_then(|b| transform(&m.model.h0, &m.model.v, &b, &opts)) {
            Ok(result) => into_handle(SwlabResult { result }, out),
            Err(e) => from_error(e),
        }
    })
}

fn copy_dense(m: &swlab::operator::OperatorMatrix, re: *mut f64, im: *mut f64, len: usize) -> SwlabStatus {
    let n = m.dim();
    if re.is_null() || im.is_null() {
        return fail(SwlabStatus::InvalidArgument, "output buffer is null");
    }
    if len < n * n {
        return fail(SwlabStatus::InvalidArgument, format!("buffers hold {len} entries, need {}", n * n));
    }
    let (re, im) = unsafe { (std::slice::from_raw_parts_mut(re, n * n), std::slice::from_raw_parts_mut(im, n * n)) };
    re.fill(0.0);
    im.fill(0.0);
    for (r, c, x) in m.triplets() {
        re[r * n + c] = x.re;
        im[r * n + c] = x.im;
    }
    SwlabStatus::Ok
}

/// Writes `H'` row-major into `re` and `im`, each of length at least dim².
///
/// # Safety
/// `result` must be a live handle; `re` and `im` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn swlab_result_hprime(result: *const SwlabResult, re: *mut f64, im: *mut f64, len: usize) -> SwlabStatus {
    guarded(|| match unsafe { result.as_ref() } {
        Some(r) => copy_dense(&r.result.h_prime, re, im, len),
        None => fail(SwlabStatus::InvalidArgument, "result is null"),
    })
}

/// Writes the generator `S` row-major into `re` and `im`.
///
/// # Safety
/// As for [`swlab_result_hprime`].
#[no_mangle]
pub unsafe extern "C" fn swlab_result_generator(
    result: *const SwlabResult,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> SwlabStatus {
    guarded(|| match unsafe { result.as_ref() } {
        Some(r) => copy_dense(&r.result.s, re, im, len),
        None => fail(SwlabStatus::InvalidArgument, "result is null"),
    })
}

/// Largest inter-block entry of the exact rotation, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swlab_result_offdiag_residual(result: *const SwlabResult) -> f64 {
    unsafe { result.as_ref() }.map_or(f64::NAN, |r| r.result.diagnostics.offdiag_residual)
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn swlab_result_free(result: *mut SwlabResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Runs `decompose`, `transform`, `compare` or `sweep` on a model-spec
/// document and returns the JSON report. Free it with [`swlab_string_free`].
///
/// # Safety
/// `command` and `spec_json` must be nul-terminated strings; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn swlab_run_json(
    command: *const c_char,
    spec_json: *const c_char,
    out: *mut *mut c_char,
) -> SwlabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SwlabStatus::InvalidArgument, "out is null");
        }
        let (cmd, text) = match unsafe { (read_str(command, "command"), read_str(spec_json, "spec_json")) } {
            (Ok(c), Ok(t)) => (c, t),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let cmd = match cmd {
            "decompose" => Command::Decompose,
            "transform" => Command::Transform,
            "compare" => Command::Compare,
            "sweep" => Command::Sweep,
            other => return fail(SwlabStatus::InvalidArgument, format!("unknown command `{other}`")),
        };
        let report = cli::load_spec(text, EngineOverrides::default()).and_then(|s| cli::run(cmd, &s, RunOptions::default()));
        match report {
            Ok(r) => {
                let c = CString::new(r.to_json_string()).expect("json has no nul bytes");
                unsafe { *out = c.into_raw() };
                SwlabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn swlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
