//! C ABI over `stv_manip`.
//!
//! Profiles and search results are opaque heap handles released with their
//! `_free` function. Every fallible call returns an [`StvStatus`]; on failure
//! [`stv_last_error`] describes the most recent error on the calling thread.
//! Candidates are 0-based `uint32_t` indices.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stv_manip::experiments::fit_exponential;
use stv_manip::io::{parse_profile, profile_to_string};
use stv_manip::votegen::{sample, BaseProfile, Distribution, UrnParam};
use stv_manip::{
    manipulate_with, CandidateId, Decision, Error, ManipulationInstance, Profile, RngSeed,
    SearchLimits, SearchOptions, SearchResult, Strategy, TieRule,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    EmptyElection = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StvDecision {
    Manipulable = 0,
    NotManipulable = 1,
    LimitExceeded = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StvTieRule {
    /// Highest index is eliminated first.
    MaxIndex = 0,
    /// Fixed pseudo-random order derived from the seed.
    Random = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StvDistribution {
    Ic = 0,
    Urn = 1,
    ResampleNasa = 2,
    ResampleHiring = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StvFit {
    pub a: f64,
    pub b: f64,
    pub r2: f64,
}

/// Opaque vote profile.
pub struct StvProfile(Profile);

/// Opaque manipulation search result.
pub struct StvSearchResult(SearchResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: StvStatus, msg: impl Into<String>) -> StvStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> StvStatus {
    match e {
        Error::Parse { .. } | Error::InvalidBallot(_) => StvStatus::ParseError,
        Error::EmptyElection | Error::NoRemainingCandidates => StvStatus::EmptyElection,
        Error::Io(_) | Error::Trial { .. } | Error::WitnessRejected { .. } => StvStatus::Internal,
        _ => StvStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), StvStatus>) -> StvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StvStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(StvStatus::Internal, "panic inside stv_manip"),
    }
}

fn check<T>(r: stv_manip::Result<T>) -> Result<T, StvStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn tie_rule(rule: StvTieRule, seed: u64) -> TieRule {
    match rule {
        StvTieRule::MaxIndex => TieRule::MaxIndex,
        StvTieRule::Random => TieRule::SeededRandom(seed),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return Err(fail(StvStatus::NullPointer, concat!("`", stringify!($p), "` is null")));
        })+
    };
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn stv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses profile text (`m=<count>` header, then `<weight>: a>b>c` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn stv_profile_parse(
    text: *const c_char,
    out: *mut *mut StvProfile,
) -> StvStatus {
    guard(|| {
        non_null!(text, out);
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| fail(StvStatus::ParseError, "profile text is not UTF-8"))?;
        let profile = check(parse_profile(text))?;
        *out = Box::into_raw(Box::new(StvProfile(profile)));
        Ok(())
    })
}

/// Draws `n` ballots over `m` candidates. `b` is only read for `Urn`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn stv_profile_sample(
    dist: StvDistribution,
    m: usize,
    n: usize,
    b: f64,
    seed: u64,
    out: *mut *mut StvProfile,
) -> StvStatus {
    guard(|| {
        non_null!(out);
        let dist = match dist {
            StvDistribution::Ic => Distribution::Ic,
            StvDistribution::Urn => Distribution::Urn(check(UrnParam::new(b))?),
            StvDistribution::ResampleNasa => {
                Distribution::Resample(BaseProfile::nasa_shape().into())
            }
            StvDistribution::ResampleHiring => {
                Distribution::Resample(BaseProfile::hiring_shape().into())
            }
        };
        let profile = check(sample(&dist, m, n, &mut RngSeed(seed).rng()))?;
        *out = Box::into_raw(Box::new(StvProfile(profile)));
        Ok(())
    })
}

/// # Safety
/// `profile` must come from this library and not be used afterwards. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn stv_profile_free(profile: *mut StvProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Number of candidates, 0 for NULL.
///
/// # Safety
/// `profile` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stv_profile_candidates(profile: *const StvProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.0.m())
}

/// Total ballot weight, 0 for NULL.
///
/// # Safety
/// `profile` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stv_profile_total_weight(profile: *const StvProfile) -> u64 {
    profile.as_ref().map_or(0, |p| p.0.total_weight())
}

/// Serializes a profile. Release the string with [`stv_string_free`].
///
/// # Safety
/// `profile` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn stv_profile_to_string(
    profile: *const StvProfile,
    out: *mut *mut c_char,
) -> StvStatus {
    guard(|| {
        non_null!(profile, out);
        let s = CString::new(profile_to_string(&(*profile).0))
            .map_err(|e| fail(StvStatus::Internal, e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn stv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the election and stores the winner in `winner`.
///
/// # Safety
/// `profile` must be a live handle and `winner` writable.
#[no_mangle]
pub unsafe extern "C" fn stv_winner(
    profile: *const StvProfile,
    tie: StvTieRule,
    tie_seed: u64,
    winner: *mut u32,
) -> StvStatus {
    guard(|| {
        non_null!(profile, winner);
        let outcome = check(stv_manip::stv_winner(
            &(*profile).0,
            tie_rule(tie, tie_seed),
        ))?;
        *winner = outcome.winner.0 as u32;
        Ok(())
    })
}

/// Searches for one extra ballot of weight `weight` that elects `preferred`
/// when added to `fixed`. `max_nodes` of 0 means unlimited.
///
/// # Safety
/// `fixed` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stv_manipulate(
    fixed: *const StvProfile,
    weight: u64,
    preferred: u32,
    tie: StvTieRule,
    tie_seed: u64,
    max_nodes: u64,
    out: *mut *mut StvSearchResult,
) -> StvStatus {
    guard(|| {
        non_null!(fixed, out);
        let preferred = u8::try_from(preferred).map_err(|_| {
            fail(
                StvStatus::InvalidArgument,
                format!("candidate {preferred} out of range"),
            )
        })?;
        let instance = check(ManipulationInstance::new(
            (*fixed).0.clone(),
            weight,
            CandidateId(preferred),
            tie_rule(tie, tie_seed),
        ))?;
        let limits = SearchLimits {
            max_nodes: (max_nodes > 0).then_some(max_nodes),
            max_time: None,
        };
        let options = SearchOptions {
            strategy: Strategy::EveryHolder,
            memoize: true,
        };
        let result = check(manipulate_with(&instance, limits, options))?;
        *out = Box::into_raw(Box::new(StvSearchResult(result)));
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn stv_result_decision(result: *const StvSearchResult) -> StvDecision {
    match (*result).0.decision {
        Decision::Manipulable => StvDecision::Manipulable,
        Decision::NotManipulable => StvDecision::NotManipulable,
        Decision::LimitExceeded => StvDecision::LimitExceeded,
    }
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn stv_result_nodes(result: *const StvSearchResult) -> u64 {
    (*result).0.nodes
}

/// Copies the witness ranking into `buf`. `len` receives the ranking length,
/// 0 when there is no witness. Returns `BufferTooSmall` if `cap < *len`.
///
/// # Safety
/// `result` must be a live handle, `len` writable and `buf` valid for `cap`
/// elements (may be NULL when `cap` is 0).
#[no_mangle]
pub unsafe extern "C" fn stv_result_witness(
    result: *const StvSearchResult,
    buf: *mut u32,
    cap: usize,
    len: *mut usize,
) -> StvStatus {
    guard(|| {
        non_null!(result, len);
        let witness = (*result).0.witness.as_deref().unwrap_or(&[]);
        *len = witness.len();
        if witness.is_empty() {
            return Ok(());
        }
        if cap < witness.len() {
            return Err(fail(
                StvStatus::BufferTooSmall,
                format!("witness needs {} slots", witness.len()),
            ));
        }
        non_null!(buf);
        for (i, c) in witness.iter().enumerate() {
            *buf.add(i) = c.0 as u32;
        }
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn stv_result_free(result: *mut StvSearchResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Least-squares fit of `y = a * b^m` in log space.
///
/// # Safety
/// `m` and `y` must be valid for `len` elements and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn stv_fit_exponential(
    m: *const f64,
    y: *const f64,
    len: usize,
    out: *mut StvFit,
) -> StvStatus {
    guard(|| {
        non_null!(m, y, out);
        let xs = std::slice::from_raw_parts(m, len);
        let ys = std::slice::from_raw_parts(y, len);
        let points: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
        let fit = check(fit_exponential(&points))?;
        *out = StvFit {
            a: fit.a,
            b: fit.b,
            r2: fit.r2,
        };
        Ok(())
    })
}
