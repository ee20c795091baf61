//! C ABI for the tetraprop toolkit.
//!
//! Spaces are opaque handles created from JSON or shorthand descriptors;
//! points travel as the same compact strings the CLI accepts; reports come
//! back as heap-allocated JSON documents released with `tp_string_free`.
//! Every fallible call returns a [`TpStatus`] and records a message
//! retrievable through `tp_last_error` on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use tetraprop::bounds;
use tetraprop::checker::{check_tetrahedral, TetraQuery};
use tetraprop::cli::{parse_point, parse_space};
use tetraprop::gallery;
use tetraprop::slicer::{h_value, Tolerances};
use tetraprop::spaces::{Point, SpaceSpec};
use tetraprop::volume::{ball_volume, VolumeMethod};

/// Result codes of the C API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    TpOk = 0,
    TpNullPointer = 1,
    TpInvalidUtf8 = 2,
    TpInvalidInput = 3,
    TpUnsupported = 4,
    TpInternal = 5,
}

/// Opaque metric-space handle.
pub struct TpSpace {
    spec: SpaceSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &tetraprop::Error) -> TpStatus {
    match err {
        tetraprop::Error::MethodUnavailable(_) | tetraprop::Error::MixedDimension { .. } => {
            TpStatus::TpUnsupported
        }
        _ => TpStatus::TpInvalidInput,
    }
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string or null.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, TpStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(TpStatus::TpNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        TpStatus::TpInvalidUtf8
    })
}

unsafe fn space_ref<'a>(ptr: *const TpSpace) -> Result<&'a SpaceSpec, TpStatus> {
    if ptr.is_null() {
        set_error("null space handle");
        return Err(TpStatus::TpNullPointer);
    }
    Ok(&(*ptr).spec)
}

fn leak_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
}

/// Version of the linked toolkit, as a static string.
#[no_mangle]
pub extern "C" fn tp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call from the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a space descriptor: shorthand (`euclidean2`, `sphere:1`,
/// `cone:0.25`, `rp2:1`, `conerp2`, `glued`, `planeray`) or a JSON document
/// `{"kind": ...}`. Returns null on failure.
///
/// # Safety
/// `descriptor` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tp_space_parse(descriptor: *const c_char) -> *mut TpSpace {
    let Ok(text) = read_str(descriptor) else { return std::ptr::null_mut() };
    match parse_space(text) {
        Ok(spec) => Box::into_raw(Box::new(TpSpace { spec })),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Releases a space handle. Null is ignored.
///
/// # Safety
/// `space` must come from `tp_space_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tp_space_free(space: *mut TpSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Analytic diameter of the space; unbounded spaces report infinity.
///
/// # Safety
/// `space` must be a live handle; `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn tp_space_diameter(space: *const TpSpace, out: *mut f64) -> TpStatus {
    let spec = match space_ref(space) {
        Ok(s) => s,
        Err(st) => return st,
    };
    if out.is_null() {
        set_error("null output pointer");
        return TpStatus::TpNullPointer;
    }
    *out = spec.diameter().unwrap_or(f64::INFINITY);
    TpStatus::TpOk
}

unsafe fn parse_point_arg(spec: &SpaceSpec, ptr: *const c_char) -> Result<Point, TpStatus> {
    let text = read_str(ptr)?;
    parse_point(spec, text).map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

/// Intrinsic distance between two points given in the CLI point syntax.
///
/// # Safety
/// All pointers must be valid; `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn tp_distance(
    space: *const TpSpace,
    point_a: *const c_char,
    point_b: *const c_char,
    out: *mut f64,
) -> TpStatus {
    let spec = match space_ref(space) {
        Ok(s) => s,
        Err(st) => return st,
    };
    if out.is_null() {
        set_error("null output pointer");
        return TpStatus::TpNullPointer;
    }
    let a = match parse_point_arg(spec, point_a) {
        Ok(p) => p,
        Err(st) => return st,
    };
    let b = match parse_point_arg(spec, point_b) {
        Ok(p) => p,
        Err(st) => return st,
    };
    match spec.distance(&a, &b) {
        Ok(d) => {
            *out = d;
            TpStatus::TpOk
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Separation infimum of the sphere intersection
/// `S(p, p_1..p_k; r, t_1..t_k)`. `samples = 0` uses the default candidate
/// count.
///
/// # Safety
/// Array arguments must reference `apex_count` / `t_count` valid elements.
#[no_mangle]
pub unsafe extern "C" fn tp_h_value(
    space: *const TpSpace,
    p: *const c_char,
    apexes: *const *const c_char,
    apex_count: usize,
    r: f64,
    t: *const f64,
    t_count: usize,
    samples: usize,
    seed: u64,
    out: *mut f64,
) -> TpStatus {
    let spec = match space_ref(space) {
        Ok(s) => s,
        Err(st) => return st,
    };
    if out.is_null() || apexes.is_null() || t.is_null() {
        set_error("null pointer argument");
        return TpStatus::TpNullPointer;
    }
    let center = match parse_point_arg(spec, p) {
        Ok(p) => p,
        Err(st) => return st,
    };
    let mut apex_points = Vec::with_capacity(apex_count);
    for i in 0..apex_count {
        match parse_point_arg(spec, *apexes.add(i)) {
            Ok(p) => apex_points.push(p),
            Err(st) => return st,
        }
    }
    let radii = std::slice::from_raw_parts(t, t_count);
    let mut tol = Tolerances::for_radius(r).with_seed(seed);
    if samples > 0 {
        tol.samples = samples;
    }
    match h_value(spec, &center, &apex_points, r, radii, &tol) {
        Ok(h) => {
            *out = h;
            TpStatus::TpOk
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Lenient query document for `tp_check_json`: tolerances may be omitted.
#[derive(serde::Deserialize)]
struct CApiQuery {
    space: SpaceSpec,
    p: serde_json::Value,
    r: f64,
    n: usize,
    alpha: f64,
    beta: f64,
    #[serde(default, rename = "C")]
    c_target: Option<f64>,
    apexes: Option<Vec<serde_json::Value>>,
    #[serde(default)]
    tol: Option<Tolerances>,
    #[serde(default)]
    seed: Option<u64>,
}

fn point_from_value(spec: &SpaceSpec, value: &serde_json::Value) -> tetraprop::Result<Point> {
    match value {
        serde_json::Value::String(s) => parse_point(spec, s),
        other => {
            let point: Point = serde_json::from_value(other.clone())?;
            point.revalidate()
        }
    }
}

/// Runs a tetrahedral-property check described by a JSON document:
/// `{"space": {...}, "p": "...", "r": 1.0, "n": 2, "alpha": 0.9,
///   "beta": 1.1, "C": 0.05, "apexes": ["..."], "seed": 42}`.
/// Points may be syntax strings or full point documents. Returns the report
/// JSON, or null with `tp_last_error` set.
///
/// # Safety
/// `query_json` must be a valid NUL-terminated string; free the result with
/// `tp_string_free`.
#[no_mangle]
pub unsafe extern "C" fn tp_check_json(query_json: *const c_char) -> *mut c_char {
    let Ok(text) = read_str(query_json) else { return std::ptr::null_mut() };
    let parsed: CApiQuery = match serde_json::from_str(text) {
        Ok(q) => q,
        Err(e) => {
            set_error(&format!("query parse error: {e}"));
            return std::ptr::null_mut();
        }
    };
    let build = || -> tetraprop::Result<String> {
        parsed.space.validate()?;
        let p = point_from_value(&parsed.space, &parsed.p)?;
        let apexes = match &parsed.apexes {
            Some(values) => Some(
                values
                    .iter()
                    .map(|v| point_from_value(&parsed.space, v))
                    .collect::<tetraprop::Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let mut tol = parsed.tol.clone().unwrap_or_else(|| Tolerances::for_radius(parsed.r));
        if let Some(seed) = parsed.seed {
            tol.seed = seed;
        }
        let query = TetraQuery {
            space: parsed.space.clone(),
            p,
            r: parsed.r,
            n: parsed.n,
            alpha: parsed.alpha,
            beta: parsed.beta,
            c_target: parsed.c_target,
            apexes,
            tol,
        };
        let report = check_tetrahedral(&query)?;
        Ok(serde_json::to_string(&report)?)
    };
    match build() {
        Ok(json) => leak_string(json),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Runs one named verification scenario and returns its report as JSON.
///
/// # Safety
/// `id` must be a valid NUL-terminated string; free the result with
/// `tp_string_free`.
#[no_mangle]
pub unsafe extern "C" fn tp_run_example(id: *const c_char, seed: u64) -> *mut c_char {
    let Ok(text) = read_str(id) else { return std::ptr::null_mut() };
    match gallery::run_example(text, seed).and_then(|r| Ok(serde_json::to_string(&r)?)) {
        Ok(json) => leak_string(json),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Hausdorff volume of a metric ball. `monte_carlo` false selects the
/// analytic path where one exists.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn tp_ball_volume(
    space: *const TpSpace,
    p: *const c_char,
    r: f64,
    monte_carlo: bool,
    samples: u64,
    seed: u64,
    out_value: *mut f64,
    out_stderr: *mut f64,
) -> TpStatus {
    let spec = match space_ref(space) {
        Ok(s) => s,
        Err(st) => return st,
    };
    if out_value.is_null() || out_stderr.is_null() {
        set_error("null output pointer");
        return TpStatus::TpNullPointer;
    }
    let center = match parse_point_arg(spec, p) {
        Ok(p) => p,
        Err(st) => return st,
    };
    let method = if monte_carlo { VolumeMethod::MonteCarlo } else { VolumeMethod::Analytic };
    match ball_volume(spec, &center, r, method, samples as usize, seed) {
        Ok(est) => {
            *out_value = est.value;
            *out_stderr = est.stderr;
            TpStatus::TpOk
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Packing count bound `floor(V0 / (C (beta-alpha)^(n-1) eps^n))`.
///
/// # Safety
/// `out` must point to a writable u64.
#[no_mangle]
pub unsafe extern "C" fn tp_packing_bound(
    v0: f64,
    c: f64,
    alpha: f64,
    beta: f64,
    n: usize,
    eps: f64,
    out: *mut u64,
) -> TpStatus {
    if out.is_null() {
        set_error("null output pointer");
        return TpStatus::TpNullPointer;
    }
    match bounds::packing_bound(v0, c, alpha, beta, n, eps) {
        Ok(v) => {
            *out = v;
            TpStatus::TpOk
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Explicit diameter bound derived from the per-ball volume estimate.
///
/// # Safety
/// `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn tp_diameter_bound(
    v0: f64,
    c: f64,
    alpha: f64,
    beta: f64,
    n: usize,
    r0: f64,
    out: *mut f64,
) -> TpStatus {
    if out.is_null() {
        set_error("null output pointer");
        return TpStatus::TpNullPointer;
    }
    match bounds::diameter_bound(v0, c, alpha, beta, n, r0) {
        Ok(v) => {
            *out = v;
            TpStatus::TpOk
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
