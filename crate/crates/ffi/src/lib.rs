//! C ABI over `crnp`.
//!
//! Objects cross the boundary as opaque handles created by `*_parse` /
//! `crnp_certify` and released by the matching `*_free`. Every fallible call
//! returns a [`CrnpStatus`]; on failure the message is available from
//! [`crnp_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crnp::compose::ComposeError;
use crnp::sim::{self, HistoryFunction, SimError};
use crnp::{PersistenceCertificate, ReactionNetwork, Verdict};

/// Status codes. Values are stable.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrnpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    TooLarge = 4,
    Numeric = 5,
    BufferTooSmall = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrnpVerdict {
    Persistent = 0,
    Undecided = 1,
}

/// Parsed, validated network.
pub struct CrnpNetwork {
    inner: ReactionNetwork,
}

/// Persistence certificate together with its JSON rendering.
pub struct CrnpCertificate {
    inner: PersistenceCertificate,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: CrnpStatus, msg: impl Into<String>) -> CrnpStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> CrnpStatus) -> CrnpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CrnpStatus::Internal, "panic inside crnp"),
    }
}

fn compose_status(e: &ComposeError) -> CrnpStatus {
    match e {
        ComposeError::TooLarge { .. } => CrnpStatus::TooLarge,
        ComposeError::InternalInconsistency(_) => CrnpStatus::Internal,
        _ => CrnpStatus::InvalidInput,
    }
}

fn sim_status(e: &SimError) -> CrnpStatus {
    match e {
        SimError::MemoryCap { .. } => CrnpStatus::TooLarge,
        SimError::NonFiniteState { .. } | SimError::NegativeStateAborted { .. } => CrnpStatus::Numeric,
        _ => CrnpStatus::InvalidInput,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn crnp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crnp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses and validates network text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn crnp_network_parse(text: *const c_char, out: *mut *mut CrnpNetwork) -> CrnpStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(CrnpStatus::NullArgument, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(CrnpStatus::InvalidUtf8, "network text is not UTF-8");
        };
        match crnp::load_network(text) {
            Ok(net) => {
                *out = Box::into_raw(Box::new(CrnpNetwork { inner: net }));
                CrnpStatus::Ok
            }
            Err(e) => fail(CrnpStatus::InvalidInput, e.to_string()),
        }
    })
}

/// # Safety
/// `net` must be null or a handle from [`crnp_network_parse`].
#[no_mangle]
pub unsafe extern "C" fn crnp_network_species_count(net: *const CrnpNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.n_species())
}

/// # Safety
/// `net` must be null or a handle from [`crnp_network_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crnp_network_free(net: *mut CrnpNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Builds the persistence certificate. `max_n == 0` selects the default
/// enumeration cap.
///
/// # Safety
/// `net` must be a live network handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn crnp_certify(
    net: *const CrnpNetwork,
    max_n: usize,
    out: *mut *mut CrnpCertificate,
) -> CrnpStatus {
    guard(|| {
        let (Some(net), false) = (net.as_ref(), out.is_null()) else {
            return fail(CrnpStatus::NullArgument, "null argument");
        };
        *out = ptr::null_mut();
        let cap = if max_n == 0 { crnp::siphon::DEFAULT_MAX_N } else { max_n };
        let cert = match crnp::certify_persistence(&net.inner, cap) {
            Ok(c) => c,
            Err(e) => return fail(compose_status(&e), e.to_string()),
        };
        let doc = crnp::report::certificate_document(&net.inner, &cert);
        let json = CString::new(serde_json::to_string_pretty(&doc).expect("json"))
            .expect("json has no interior NUL");
        *out = Box::into_raw(Box::new(CrnpCertificate { inner: cert, json }));
        CrnpStatus::Ok
    })
}

/// # Safety
/// `cert` must be a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn crnp_certificate_verdict(cert: *const CrnpCertificate) -> CrnpVerdict {
    match cert.as_ref().map(|c| c.inner.verdict) {
        Some(Verdict::Persistent) => CrnpVerdict::Persistent,
        _ => CrnpVerdict::Undecided,
    }
}

/// Whether the verdict rests on an unverified complex balance assumption.
///
/// # Safety
/// `cert` must be a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn crnp_certificate_is_conditional(cert: *const CrnpCertificate) -> bool {
    cert.as_ref().is_some_and(|c| c.inner.conditional)
}

/// JSON document owned by the certificate; valid until it is freed.
///
/// # Safety
/// `cert` must be a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn crnp_certificate_json(cert: *const CrnpCertificate) -> *const c_char {
    cert.as_ref().map_or(ptr::null(), |c| c.json.as_ptr())
}

/// # Safety
/// `cert` must be null or a handle from [`crnp_certify`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crnp_certificate_free(cert: *mut CrnpCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Integrates from the constant history `history[0..n]` and writes the
/// state at `t_end` to `out[0..n]`, where `n` is the species count.
///
/// # Safety
/// `history` and `out` must each point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn crnp_simulate_terminal(
    net: *const CrnpNetwork,
    history: *const f64,
    len: usize,
    t_end: f64,
    step: f64,
    out: *mut f64,
) -> CrnpStatus {
    guard(|| {
        let Some(net) = net.as_ref() else {
            return fail(CrnpStatus::NullArgument, "null network");
        };
        if history.is_null() || out.is_null() {
            return fail(CrnpStatus::NullArgument, "null buffer");
        }
        let n = net.inner.n_species();
        if len < n {
            return fail(CrnpStatus::BufferTooSmall, format!("need {n} values, got {len}"));
        }
        let psi = HistoryFunction::Constant(std::slice::from_raw_parts(history, n).to_vec());
        match sim::integrate(&net.inner, &psi, t_end, step) {
            Ok(traj) => {
                std::slice::from_raw_parts_mut(out, n).copy_from_slice(traj.terminal());
                CrnpStatus::Ok
            }
            Err(e) => fail(sim_status(&e), e.to_string()),
        }
    })
}
