//! C interface to the episode miner.
//!
//! Sequences and mining results are opaque handles owned by the caller and
//! released with the matching `_free` function. Every call returns an
//! [`EpimineStatus`]; on failure `epimine_last_error` describes what went
//! wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use epimine::json::MiningOutput;
use epimine::parallel::mine_parallel;
use epimine::serial::mine_serial;
use epimine::simulator::{build_network, embed_pattern, preset_patterns, setup_rng, simulate, ConnectionScheme, SimParams};
use epimine::{Error, EventSequence, IntervalConstraint, MinedLevels, MiningConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpimineStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Domain = 4,
    Io = 5,
    Capacity = 6,
    Conflict = 7,
    UnknownLabel = 8,
    Panic = 9,
}

/// An event sequence.
pub struct EpimineSequence {
    inner: EventSequence,
}

/// Frequent episodes from one mining run.
pub struct EpimineResult {
    inner: MinedLevels,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EpimineStatus {
    match e {
        Error::Parse { .. } | Error::Json(_) => EpimineStatus::Parse,
        Error::Domain(_) => EpimineStatus::Domain,
        Error::Capacity(_) => EpimineStatus::Capacity,
        Error::Conflict { .. } => EpimineStatus::Conflict,
        Error::UnknownLabel(_) => EpimineStatus::UnknownLabel,
        Error::Io(_) => EpimineStatus::Io,
    }
}

enum Fail {
    Status(EpimineStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EpimineStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EpimineStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            EpimineStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Status(EpimineStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(EpimineStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

fn null(name: &str) -> Fail {
    Fail::Status(EpimineStatus::NullPointer, format!("{name} is null"))
}

fn emit_sequence(seq: EventSequence, out: *mut *mut EpimineSequence) {
    let h = Box::new(EpimineSequence { inner: seq });
    unsafe { *out = Box::into_raw(h) };
}

fn emit_result(mined: MinedLevels, seq: &EventSequence, cfg: &MiningConfig, out: *mut *mut EpimineResult) -> Result<(), Fail> {
    let doc = MiningOutput::new(&mined, seq.alphabet(), seq.len(), cfg.threshold_count(seq.len()));
    let text = serde_json::to_string(&doc).map_err(Error::from)?;
    let json = CString::new(text).map_err(|e| Error::Domain(e.to_string()))?;
    unsafe { *out = Box::into_raw(Box::new(EpimineResult { inner: mined, json })) };
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn epimine_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses `label,time` lines.
///
/// # Safety
/// `csv` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epimine_sequence_from_csv(csv: *const c_char, out: *mut *mut EpimineSequence) -> EpimineStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(csv, "csv")?;
        emit_sequence(EventSequence::parse_str(text)?, out);
        Ok(())
    })
}

/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epimine_sequence_from_file(path: *const c_char, out: *mut *mut EpimineSequence) -> EpimineStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let file = std::fs::File::open(path).map_err(Error::from)?;
        emit_sequence(EventSequence::parse(std::io::BufReader::new(file))?, out);
        Ok(())
    })
}

/// Simulates a network. `params_json` holds simulator parameters (missing
/// fields take defaults) and may be null; `preset` names embedded patterns
/// and may be null.
///
/// # Safety
/// Non-null strings must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epimine_simulate(
    params_json: *const c_char,
    preset: *const c_char,
    out: *mut *mut EpimineSequence,
) -> EpimineStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params: SimParams = if params_json.is_null() {
            SimParams::default()
        } else {
            serde_json::from_str(str_arg(params_json, "params_json")?).map_err(Error::from)?
        };
        let mut net = build_network(&params, ConnectionScheme::BernoulliPairs, &mut setup_rng(params.seed))?;
        if !preset.is_null() {
            let name = str_arg(preset, "preset")?;
            let specs = preset_patterns(name).ok_or_else(|| Error::Domain(format!("unknown preset {name:?}")))?;
            for s in &specs {
                net = embed_pattern(&net, s, &params)?;
            }
        }
        emit_sequence(simulate(&net, &params)?, out);
        Ok(())
    })
}

/// Number of events, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epimine_sequence_len(seq: *const EpimineSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.inner.len())
}

/// # Safety
/// `seq` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epimine_sequence_free(seq: *mut EpimineSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

fn config(threshold: f64, max_size: usize) -> MiningConfig {
    MiningConfig {
        threshold_fraction: threshold,
        max_size,
        ..MiningConfig::default()
    }
}

/// Parallel episodes whose occurrences span at most `expiry` seconds.
///
/// # Safety
/// `seq` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epimine_mine_parallel(
    seq: *const EpimineSequence,
    expiry: f64,
    threshold: f64,
    max_size: usize,
    out: *mut *mut EpimineResult,
) -> EpimineStatus {
    guard(|| {
        let seq = seq.as_ref().ok_or_else(|| null("seq"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = MiningConfig {
            expiry: Some(expiry),
            ..config(threshold, max_size)
        };
        cfg.validate()?;
        let mined = mine_parallel(&seq.inner, &cfg)?;
        emit_result(mined, &seq.inner, &cfg, out)
    })
}

/// Serial episodes over the candidate intervals `(lows[i], highs[i]]`.
///
/// # Safety
/// `seq` must be a live handle; `lows` and `highs` must point to
/// `n_intervals` values each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epimine_mine_serial(
    seq: *const EpimineSequence,
    lows: *const f64,
    highs: *const f64,
    n_intervals: usize,
    threshold: f64,
    max_size: usize,
    out: *mut *mut EpimineResult,
) -> EpimineStatus {
    guard(|| {
        let seq = seq.as_ref().ok_or_else(|| null("seq"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if n_intervals > 0 && (lows.is_null() || highs.is_null()) {
            return Err(null("lows/highs"));
        }
        let intervals = (0..n_intervals)
            .map(|i| IntervalConstraint::new(*lows.add(i), *highs.add(i)))
            .collect::<Result<Vec<_>, _>>()?;
        let cfg = MiningConfig {
            candidate_intervals: intervals,
            ..config(threshold, max_size)
        };
        cfg.validate()?;
        let mined = mine_serial(&seq.inner, &cfg)?;
        emit_result(mined, &seq.inner, &cfg, out)
    })
}

/// Number of frequent episodes of `size`, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epimine_result_count(result: *const EpimineResult, size: usize) -> usize {
    result.as_ref().map_or(0, |r| r.inner.level(size).len())
}

/// Largest episode size found, 0 if none.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epimine_result_max_size(result: *const EpimineResult) -> usize {
    result.as_ref().and_then(|r| r.inner.max_level()).unwrap_or(0)
}

/// The result as JSON. The string belongs to the handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epimine_result_json(result: *const EpimineResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epimine_result_free(result: *mut EpimineResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
