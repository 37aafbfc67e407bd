//! C ABI over `halfwave-core`.
//!
//! Every fallible entry point returns an [`HwStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`hw_last_error_message`]. Profiles and mollifiers are opaque
//! handles released with their `_free` functions; panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use halfwave_core::divergence::{boundedness_probe, falsification_probe, slope_law, ProbeOutcome, Verdict};
use halfwave_core::profiles::{halfline_energy, CutoffLevel, Mollifier, Profile};
use halfwave_core::reduced::{
    angular_integral, critical_angle, factorized_value, n3_remark_value, reduced_q_value, sphere_surface_measure,
    AngularDomain, ProbeConfig,
};
use halfwave_core::Error;

/// Opaque time profile.
pub struct HwProfile(Profile);

/// Opaque radial cutoff.
pub struct HwMollifier(Mollifier);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoCriticalAngle = 3,
    DomainTouchesSingularity = 4,
    NonConvergence = 5,
    InsufficientData = 6,
    GridError = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HwVerdictKind {
    Divergent = 0,
    Bounded = 1,
    Inconclusive = 2,
}

/// Probe summary. Fields that do not apply to `kind` are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HwProbeResult {
    pub kind: HwVerdictKind,
    pub slope: f64,
    pub slope_stderr: f64,
    pub limit_estimate: f64,
    pub tail_bound: f64,
    /// Number of levels evaluated.
    pub levels: usize,
    /// Last computed `Q_k`, NaN if none.
    pub last_value: f64,
}

/// Reduced-functional configuration. `unbounded != 0` drops the cutoff and
/// ignores `level`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HwProbeConfig {
    pub n: u32,
    pub c: f64,
    pub s: f64,
    pub level: i32,
    pub unbounded: i32,
    pub domain_start: f64,
    pub domain_end: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> HwStatus {
    match e {
        Error::InvalidArgument(_) => HwStatus::InvalidArgument,
        Error::NonConvergence { .. } => HwStatus::NonConvergence,
        Error::NoCriticalAngle(_) => HwStatus::NoCriticalAngle,
        Error::DomainTouchesSingularity { .. } | Error::DivergentAtOrigin { .. } => {
            HwStatus::DomainTouchesSingularity
        }
        Error::InsufficientData(_) => HwStatus::InsufficientData,
        Error::NyquistViolation { .. }
        | Error::TimeWindowTooSmall { .. }
        | Error::TimeStepTooCoarse { .. }
        | Error::BoxTooSmall { .. } => HwStatus::GridError,
        Error::Io(_) => HwStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> HwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HwStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            HwStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            HwStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write<T>(ptr: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    ptr.write(value);
    Ok(())
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    // checked before boxing so a null `out` does not leak
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

fn level_of(cfg: &HwProbeConfig) -> CutoffLevel {
    if cfg.unbounded != 0 {
        CutoffLevel::Unbounded
    } else {
        CutoffLevel::Level(cfg.level)
    }
}

fn summarize(out: &ProbeOutcome) -> HwProbeResult {
    let mut r = HwProbeResult {
        kind: HwVerdictKind::Inconclusive,
        slope: f64::NAN,
        slope_stderr: f64::NAN,
        limit_estimate: f64::NAN,
        tail_bound: f64::NAN,
        levels: out.sequence.as_ref().map_or(0, |s| s.len()),
        last_value: out
            .sequence
            .as_ref()
            .and_then(|s| s.entries.last())
            .map_or(f64::NAN, |e| e.1),
    };
    match out.verdict {
        Verdict::Divergent { slope, slope_stderr } => {
            r.kind = HwVerdictKind::Divergent;
            r.slope = slope;
            r.slope_stderr = slope_stderr;
        }
        Verdict::Bounded {
            limit_estimate,
            tail_bound,
        } => {
            r.kind = HwVerdictKind::Bounded;
            r.limit_estimate = limit_estimate;
            r.tail_bound = tail_bound;
        }
        Verdict::Inconclusive { ref reason } => set_last_error(reason.clone()),
    }
    r
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread (empty if none). The pointer
/// stays valid until the next failing call on the same thread. An
/// inconclusive probe also leaves its reason here.
#[no_mangle]
pub extern "C" fn hw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// The unit-L² Gaussian.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_profile_default(out: *mut *mut HwProfile) -> HwStatus {
    guard(|| emit(out, HwProfile(Profile::default_normalized())))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_profile_gaussian(width: f64, out: *mut *mut HwProfile) -> HwStatus {
    guard(|| {
        let p = Profile::gaussian(width)?;
        emit(out, HwProfile(p))
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_profile_bump(center: f64, radius: f64, out: *mut *mut HwProfile) -> HwStatus {
    guard(|| {
        let p = Profile::compact_bump(center, radius)?;
        emit(out, HwProfile(p))
    })
}

/// Parses the CLI form, e.g. `gaussian:width=1` or `bump:center=0,radius=1`.
///
/// # Safety
/// `spec` must be a NUL-terminated string, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_profile_parse(spec: *const c_char, out: *mut *mut HwProfile) -> HwStatus {
    guard(|| {
        if spec.is_null() {
            return Err(Failure::Null("spec"));
        }
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| Error::InvalidArgument("profile spec is not UTF-8".into()))?;
        let p: Profile = text.parse()?;
        emit(out, HwProfile(p))
    })
}

/// New handle for `alpha · f(t/mu)`.
///
/// # Safety
/// `p` must be a live handle, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_profile_transform(
    p: *const HwProfile,
    alpha: f64,
    mu: f64,
    out: *mut *mut HwProfile,
) -> HwStatus {
    guard(|| {
        let q = deref(p, "profile")?.0.scaled(alpha).dilated(mu)?;
        emit(out, HwProfile(q))
    })
}

/// # Safety
/// `p` must come from a `hw_profile_*` constructor and not be freed twice.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hw_profile_free(p: *mut HwProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `f̂(η)` as real and imaginary parts.
///
/// # Safety
/// `p` must be a live handle, `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_profile_fhat(p: *const HwProfile, eta: f64, re: *mut f64, im: *mut f64) -> HwStatus {
    guard(|| {
        let z = deref(p, "profile")?.0.fhat(eta);
        write(re, z.re, "re")?;
        write(im, z.im, "im")
    })
}

/// `∫_0^∞ |f̂(η)|² dη`.
///
/// # Safety
/// `p` must be a live handle, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_profile_energy(p: *const HwProfile, tol: f64, out: *mut f64) -> HwStatus {
    guard(|| {
        let e = halfline_energy(&deref(p, "profile")?.0, tol)?;
        write(out, e, "out")
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_mollifier_new(inner: f64, outer: f64, out: *mut *mut HwMollifier) -> HwStatus {
    guard(|| {
        let m = Mollifier::new(inner, outer)?;
        emit(out, HwMollifier(m))
    })
}

/// # Safety
/// `m` must come from [`hw_mollifier_new`] and not be freed twice. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn hw_mollifier_free(m: *mut HwMollifier) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// `χ(|η|)`.
///
/// # Safety
/// `m` must be a live handle, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_mollifier_eval(m: *const HwMollifier, eta: f64, out: *mut f64) -> HwStatus {
    guard(|| write(out, deref(m, "mollifier")?.0.eval(eta), "out"))
}

/// `arccos(-1/c)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_critical_angle(c: f64, out: *mut f64) -> HwStatus {
    guard(|| write(out, critical_angle(c)?, "out"))
}

/// `|S^m|`.
#[no_mangle]
pub extern "C" fn hw_sphere_surface_measure(m: u32) -> f64 {
    sphere_surface_measure(m)
}

/// `∫ (sin θ)^{n-2}/|1 + c cos θ| dθ` over `[start, end]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_angular_integral(
    n: u32,
    c: f64,
    start: f64,
    end: f64,
    tol: f64,
    out: *mut f64,
) -> HwStatus {
    guard(|| write(out, angular_integral(n, c, AngularDomain::new(start, end)?, tol)?, "out"))
}

/// `Q_k` for `cfg`.
///
/// # Safety
/// `cfg`, `p` and `m` must be valid, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_reduced_q_value(
    cfg: *const HwProbeConfig,
    p: *const HwProfile,
    m: *const HwMollifier,
    tol: f64,
    out: *mut f64,
) -> HwStatus {
    guard(|| {
        let c = deref(cfg, "config")?;
        let dom = AngularDomain::new(c.domain_start, c.domain_end)?;
        let config = ProbeConfig::new(c.n, c.c, c.s, level_of(c), dom)?;
        let q = reduced_q_value(&config, &deref(p, "profile")?.0, &deref(m, "mollifier")?.0, tol)?;
        write(out, q, "out")
    })
}

/// `E(f) · ∫ (sin θ)^{n-2}/(1 + c cos θ) dθ` over a subcritical domain.
///
/// # Safety
/// `p` must be a live handle, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_factorized_value(
    n: u32,
    c: f64,
    p: *const HwProfile,
    start: f64,
    end: f64,
    tol: f64,
    out: *mut f64,
) -> HwStatus {
    guard(|| {
        let v = factorized_value(n, c, &deref(p, "profile")?.0, AngularDomain::new(start, end)?, tol)?;
        write(out, v, "out")
    })
}

/// The three-dimensional remark at `ε`: `E · ln(2/ε)` and its quadrature.
///
/// # Safety
/// `p` must be a live handle, the outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_n3_remark(
    eps: f64,
    p: *const HwProfile,
    tol: f64,
    closed_form: *mut f64,
    quadrature: *mut f64,
) -> HwStatus {
    guard(|| {
        let r = n3_remark_value(eps, &deref(p, "profile")?.0, tol)?;
        write(closed_form, r.closed_form, "closed_form")?;
        write(quadrature, r.quadrature, "quadrature")
    })
}

/// `ln 2 · (sin θ₀)^{n-3}/c · energy`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_slope_law(n: u32, c: f64, energy: f64, out: *mut f64) -> HwStatus {
    guard(|| write(out, slope_law(n, c, energy)?, "out"))
}

/// Endpoint probe on `[π/2, θ₀]` for levels `0..=kmax`.
///
/// # Safety
/// `p` and `m` must be live handles, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_falsification_probe(
    n: u32,
    c: f64,
    p: *const HwProfile,
    m: *const HwMollifier,
    kmax: i32,
    out: *mut HwProbeResult,
) -> HwStatus {
    guard(|| {
        let o = falsification_probe(n, c, &deref(p, "profile")?.0, &deref(m, "mollifier")?.0, kmax)?;
        write(out, summarize(&o), "out")
    })
}

/// Probe at `s = n/2 - 1/q` on `[π/2, θ₀]` for levels `0..=kmax`.
///
/// # Safety
/// `p` and `m` must be live handles, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hw_boundedness_probe(
    n: u32,
    q: f64,
    c: f64,
    p: *const HwProfile,
    m: *const HwMollifier,
    kmax: i32,
    out: *mut HwProbeResult,
) -> HwStatus {
    guard(|| {
        let o = boundedness_probe(n, q, c, &deref(p, "profile")?.0, &deref(m, "mollifier")?.0, kmax)?;
        write(out, summarize(&o), "out")
    })
}
