//! C ABI for the interval-sieve library.
//!
//! Conventions:
//! - Opaque handles (`FsSequence`, `FsParams`, `FsCertificate`) own their
//!   Rust objects; free them with the matching `fs_*_free`.
//! - Every fallible call returns an [`FsStatus`]; on error, a detailed
//!   message is available from `fs_last_error_message` (caller frees the
//!   returned string with `fs_string_free`).
//! - Strings cross the boundary as NUL-terminated UTF-8. Rationals travel
//!   as `"p/q"` text so no precision is lost.

use fracsieve::params::ParamsError;
use fracsieve::report::CertificateDoc;
use fracsieve::sequence::parse_rational;
use fracsieve::sieve::{sieve_range, SieveError};
use fracsieve::witness::{certify, extract_witness, WitnessError};
use fracsieve::{
    DyadicCell, DyadicRational, GrowthSequence, HMode, SieveParams, WitnessCertificate,
    ZoomStrategy,
};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FsStatus {
    FsOk = 0,
    FsErrNullPointer = 1,
    FsErrUtf8 = 2,
    FsErrInvalidArgument = 3,
    FsErrDomain = 4,
    FsErrCapacity = 5,
    FsErrEmptySurvivors = 6,
    FsErrInternal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("error").expect("literal"));
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of_sieve(err: &SieveError) -> FsStatus {
    match err {
        SieveError::EmptySurvivors { .. } => FsStatus::FsErrEmptySurvivors,
        SieveError::Capacity { .. } | SieveError::LevelOverflow(_) => FsStatus::FsErrCapacity,
        _ => FsStatus::FsErrDomain,
    }
}

fn status_of_params(err: &ParamsError) -> FsStatus {
    match err {
        ParamsError::IndexCap { .. } => FsStatus::FsErrCapacity,
        _ => FsStatus::FsErrDomain,
    }
}

fn status_of_witness(err: &WitnessError) -> FsStatus {
    match err {
        WitnessError::EmptySurvivors => FsStatus::FsErrEmptySurvivors,
        WitnessError::Params(p) => status_of_params(p),
        WitnessError::Sieve(s) => status_of_sieve(s),
        _ => FsStatus::FsErrDomain,
    }
}

/// Opaque growth-sequence handle.
pub struct FsSequence(GrowthSequence);
/// Opaque parameter-system handle.
pub struct FsParams(SieveParams);
/// Opaque witness-certificate handle.
pub struct FsCertificate(WitnessCertificate);

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, FsStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(FsStatus::FsErrNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8".into());
        FsStatus::FsErrUtf8
    })
}

fn string_out(s: String) -> *mut c_char {
    CString::new(s)
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Most recent error message on this thread, or NULL. Free the result with
/// `fs_string_free`.
#[no_mangle]
pub extern "C" fn fs_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(msg) => string_out(msg.to_string_lossy().into_owned()),
        None => ptr::null_mut(),
    })
}

/// Free a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must have been returned by a `fracsieve` FFI call and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a sequence spec (`poly:1,0,0` or `power:gamma=3/2,eps1=1`) with the
/// given domain start `n_min` (use 2 when unsure).
///
/// # Safety
/// `spec` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn fs_sequence_parse(
    spec: *const c_char,
    n_min: u64,
    out: *mut *mut FsSequence,
) -> FsStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return FsStatus::FsErrNullPointer;
    }
    let spec = match cstr_arg(spec) {
        Ok(s) => s,
        Err(st) => return st,
    };
    match GrowthSequence::parse_with_n_min(spec, n_min) {
        Ok(seq) => {
            *out = Box::into_raw(Box::new(FsSequence(seq)));
            FsStatus::FsOk
        }
        Err(e) => {
            set_error(e.to_string());
            FsStatus::FsErrInvalidArgument
        }
    }
}

/// # Safety
/// `seq` must be a handle from `fs_sequence_parse`, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn fs_sequence_free(seq: *mut FsSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Midpoint of `t_n` as a double (exact values convert exactly when they fit).
///
/// # Safety
/// `seq` must be a live sequence handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_sequence_eval_f64(
    seq: *const FsSequence,
    n: u64,
    out: *mut f64,
) -> FsStatus {
    if seq.is_null() || out.is_null() {
        set_error("null pointer".into());
        return FsStatus::FsErrNullPointer;
    }
    match (*seq).0.eval(n, 64) {
        Ok(v) => {
            *out = v.to_f64();
            FsStatus::FsOk
        }
        Err(e) => {
            set_error(e.to_string());
            FsStatus::FsErrDomain
        }
    }
}

/// New parameter system for the growth exponent `gamma` (rational text like
/// `"2"` or `"3/2"`), defaulting to the standard constant and effective gaps.
///
/// # Safety
/// `gamma` must be a valid string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_params_new(
    gamma: *const c_char,
    out: *mut *mut FsParams,
) -> FsStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return FsStatus::FsErrNullPointer;
    }
    let text = match cstr_arg(gamma) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let Some(g) = parse_rational(text) else {
        set_error(format!("cannot parse gamma `{text}`"));
        return FsStatus::FsErrInvalidArgument;
    };
    match SieveParams::new(g) {
        Ok(p) => {
            *out = Box::into_raw(Box::new(FsParams(p)));
            FsStatus::FsOk
        }
        Err(e) => {
            set_error(e.to_string());
            FsStatus::FsErrInvalidArgument
        }
    }
}

/// # Safety
/// `params` must be a handle from `fs_params_new`, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn fs_params_free(params: *mut FsParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Replace the constant `c` (rational text); switches to custom mode.
///
/// # Safety
/// `params` must be a live handle; `c` a valid string.
#[no_mangle]
pub unsafe extern "C" fn fs_params_set_custom_c(
    params: *mut FsParams,
    c: *const c_char,
) -> FsStatus {
    if params.is_null() {
        set_error("null params handle".into());
        return FsStatus::FsErrNullPointer;
    }
    let text = match cstr_arg(c) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let Some(value) = parse_rational(text) else {
        set_error(format!("cannot parse c `{text}`"));
        return FsStatus::FsErrInvalidArgument;
    };
    match (*params).0.clone().with_custom_c(value) {
        Ok(p) => {
            (*params).0 = p;
            FsStatus::FsOk
        }
        Err(e) => {
            set_error(e.to_string());
            FsStatus::FsErrInvalidArgument
        }
    }
}

/// Select the gap-function mode: 0 = effective (default), 1 = closed-form.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_params_set_h_mode(params: *mut FsParams, paper: i32) -> FsStatus {
    if params.is_null() {
        set_error("null params handle".into());
        return FsStatus::FsErrNullPointer;
    }
    let mode = if paper != 0 { HMode::Paper } else { HMode::Effective };
    (*params).0 = (*params).0.clone().with_h_mode(mode);
    FsStatus::FsOk
}

/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_params_set_n_start(params: *mut FsParams, n_start: u64) -> FsStatus {
    if params.is_null() {
        set_error("null params handle".into());
        return FsStatus::FsErrNullPointer;
    }
    (*params).0 = (*params).0.clone().with_n_start(n_start);
    FsStatus::FsOk
}

/// `c = 60·ln(2 + 1/gamma)` as a double; NaN on domain error.
#[no_mangle]
pub extern "C" fn fs_c_of_gamma(gamma: f64) -> f64 {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return f64::NAN;
    }
    60.0 * (2.0 + 1.0 / gamma).ln()
}

/// Certified bounds on `delta_n = 1/(c·n·ln n)`.
///
/// # Safety
/// `params` must be a live handle; `lo`/`hi` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fs_params_delta(
    params: *const FsParams,
    n: u64,
    lo: *mut f64,
    hi: *mut f64,
) -> FsStatus {
    if params.is_null() || lo.is_null() || hi.is_null() {
        set_error("null pointer".into());
        return FsStatus::FsErrNullPointer;
    }
    match (*params).0.delta(n) {
        Ok(d) => {
            *lo = d.lo().to_f64();
            *hi = d.hi().to_f64();
            FsStatus::FsOk
        }
        Err(e) => {
            set_error(e.to_string());
            status_of_params(&e)
        }
    }
}

/// Dyadic level `l_n`.
///
/// # Safety
/// Handles must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_dyadic_level(
    params: *const FsParams,
    seq: *const FsSequence,
    n: u64,
    out: *mut u32,
) -> FsStatus {
    if params.is_null() || seq.is_null() || out.is_null() {
        set_error("null pointer".into());
        return FsStatus::FsErrNullPointer;
    }
    match (*params).0.dyadic_level(&(*seq).0, n) {
        Ok(l) => {
            *out = l;
            FsStatus::FsOk
        }
        Err(e) => {
            set_error(e.to_string());
            status_of_params(&e)
        }
    }
}

/// Effective gap `h_eff(n) = min{m > n : t_m/t_n >= 1/delta_n}`.
///
/// # Safety
/// Handles must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_h_effective(
    params: *const FsParams,
    seq: *const FsSequence,
    n: u64,
    out: *mut u64,
) -> FsStatus {
    if params.is_null() || seq.is_null() || out.is_null() {
        set_error("null pointer".into());
        return FsStatus::FsErrNullPointer;
    }
    match (*params).0.h_effective(&(*seq).0, n) {
        Ok(m) => {
            *out = m;
            FsStatus::FsOk
        }
        Err(e) => {
            set_error(e.to_string());
            status_of_params(&e)
        }
    }
}

/// Sieve `[n_from, n_to]` in a window, extract a witness, and certify it.
/// `window` is `"auto"` or `"level:index"`; `strategy` is `leftmost`,
/// `max-run`, or `seeded-random`.
///
/// # Safety
/// Handles must be live; strings valid; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_witness_run(
    seq: *const FsSequence,
    params: *const FsParams,
    window: *const c_char,
    n_from: u64,
    n_to: u64,
    strategy: *const c_char,
    seed: u64,
    out: *mut *mut FsCertificate,
) -> FsStatus {
    if seq.is_null() || params.is_null() || out.is_null() {
        set_error("null pointer".into());
        return FsStatus::FsErrNullPointer;
    }
    let window_text = match cstr_arg(window) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let strategy_text = match cstr_arg(strategy) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let strategy: ZoomStrategy = match strategy_text.parse() {
        Ok(s) => s,
        Err(e) => {
            set_error(e);
            return FsStatus::FsErrInvalidArgument;
        }
    };
    let seq = &(*seq).0;
    let params = &(*params).0;
    let mut config = fracsieve::RunConfig::default();
    config.seed = seed;
    config.n_from = n_from;
    if let Some(w) = fracsieve::WindowSpec::parse(window_text) {
        config.window = w;
    } else {
        set_error(format!("bad window spec `{window_text}`"));
        return FsStatus::FsErrInvalidArgument;
    }
    let cell: DyadicCell = match config.resolve_window(seq, params) {
        Ok(c) => c,
        Err(e) => {
            set_error(e.to_string());
            return FsStatus::FsErrInvalidArgument;
        }
    };
    let state = match sieve_range(seq, params, cell, n_from.max(seq.n_min()), n_to, 1 << 25) {
        Ok(s) => s,
        Err(e) => {
            set_error(e.to_string());
            return status_of_sieve(&e);
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (alpha, _chain) = match extract_witness(&state, strategy, &mut rng) {
        Ok(v) => v,
        Err(e) => {
            set_error(e.to_string());
            return status_of_witness(&e);
        }
    };
    match certify(&alpha, seq, params, n_from.max(seq.n_min()), n_to) {
        Ok(cert) => {
            *out = Box::into_raw(Box::new(FsCertificate(cert)));
            FsStatus::FsOk
        }
        Err(e) => {
            set_error(e.to_string());
            status_of_witness(&e)
        }
    }
}

/// Certify a supplied `alpha = num/2^level` over `[n_from, n_to]`.
/// `num` is decimal text (arbitrary size).
///
/// # Safety
/// Handles must be live; `num` a valid string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_certify(
    seq: *const FsSequence,
    params: *const FsParams,
    num: *const c_char,
    level: u32,
    n_from: u64,
    n_to: u64,
    out: *mut *mut FsCertificate,
) -> FsStatus {
    if seq.is_null() || params.is_null() || out.is_null() {
        set_error("null pointer".into());
        return FsStatus::FsErrNullPointer;
    }
    let num_text = match cstr_arg(num) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let Ok(num) = num_text.parse::<BigUint>() else {
        set_error(format!("cannot parse alpha numerator `{num_text}`"));
        return FsStatus::FsErrInvalidArgument;
    };
    let alpha = match DyadicRational::new(num, level) {
        Ok(a) => a,
        Err(e) => {
            set_error(e.to_string());
            return FsStatus::FsErrInvalidArgument;
        }
    };
    let seq = &(*seq).0;
    match certify(&alpha, seq, &(*params).0, n_from.max(seq.n_min()), n_to) {
        Ok(cert) => {
            *out = Box::into_raw(Box::new(FsCertificate(cert)));
            FsStatus::FsOk
        }
        Err(e) => {
            set_error(e.to_string());
            status_of_witness(&e)
        }
    }
}

/// 1 if the certificate's verdict is true, 0 if false, -1 on a null handle.
///
/// # Safety
/// `cert` must be a live certificate handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fs_certificate_verdict(cert: *const FsCertificate) -> i32 {
    if cert.is_null() {
        return -1;
    }
    (*cert).0.verdict as i32
}

/// Lower bound on the minimal score `n·ln n·‖α·t_n‖` over the range.
///
/// # Safety
/// `cert` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_certificate_min_score(
    cert: *const FsCertificate,
    out: *mut f64,
) -> FsStatus {
    if cert.is_null() || out.is_null() {
        set_error("null pointer".into());
        return FsStatus::FsErrNullPointer;
    }
    let score = &(*cert).0.min_score;
    *out = score.to_f64().unwrap_or(f64::NAN);
    FsStatus::FsOk
}

/// Witness numerator as decimal text (free with `fs_string_free`) and its
/// dyadic level.
///
/// # Safety
/// `cert` must be a live handle; out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn fs_certificate_alpha(
    cert: *const FsCertificate,
    num_out: *mut *mut c_char,
    level_out: *mut u32,
) -> FsStatus {
    if cert.is_null() || num_out.is_null() || level_out.is_null() {
        set_error("null pointer".into());
        return FsStatus::FsErrNullPointer;
    }
    let alpha = &(*cert).0.alpha;
    *num_out = string_out(alpha.num().to_string());
    *level_out = alpha.level();
    FsStatus::FsOk
}

/// Whole certificate as JSON (free with `fs_string_free`).
///
/// # Safety
/// `cert` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_certificate_to_json(
    cert: *const FsCertificate,
    out: *mut *mut c_char,
) -> FsStatus {
    if cert.is_null() || out.is_null() {
        set_error("null pointer".into());
        return FsStatus::FsErrNullPointer;
    }
    let doc = CertificateDoc::from_certificate(&(*cert).0, None);
    match serde_json::to_string_pretty(&doc) {
        Ok(json) => {
            *out = string_out(json);
            FsStatus::FsOk
        }
        Err(e) => {
            set_error(e.to_string());
            FsStatus::FsErrInternal
        }
    }
}

/// # Safety
/// `cert` must be a handle from a certify call, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn fs_certificate_free(cert: *mut FsCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}
