//! C ABI for the matching engine: opaque handles, integer status codes, and
//! a thread-local error message.
//!
//! Conventions:
//! - Constructors write an owned handle through an out-pointer and return
//!   [`CmStatus`]; every handle has a matching `cm_*_free` that accepts null.
//! - On any non-OK status, `cm_last_error()` returns a UTF-8 message that
//!   stays valid until the next failing call on the same thread.
//! - Fixed-point quantities cross the boundary in their integer encodings:
//!   distances in halves (0.5 = 1), risk scores in hundredths (0.75 = 75),
//!   availability in parts per million (0.20 = 200000).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use carematch::datasets;
use carematch::domain::{
    AvailabilityFraction, CancerCenter, Distance, MatchConfig, Patient, PolicySpec, RiskScore,
};
use carematch::geo::{DistanceTable, StateAdjacency};
use carematch::io;
use carematch::riskrank::{synthesize_cohort, CohortSpec};
use carematch::rounds::{run_to_completion, RoundError, RunOptions, ScenarioOutcome};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    IoError = 3,
    ParseError = 4,
    ValidationError = 5,
    NoEligiblePatients = 6,
    StabilityViolation = 7,
    InternalError = 8,
}

/// Patient response model selector for [`CmConfig`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmPolicy {
    AlwaysAccept = 0,
    Bernoulli = 1,
}

/// Scenario parameters in fixed-point integer encodings.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CmConfig {
    /// Percent of annual income available for treatment, in (0, 100].
    pub x_percent: u32,
    /// Accessible-distance cutoff in halves (strict comparison); 3.0 = 6.
    pub t_ad_halves: u32,
    /// Risk threshold in hundredths (inclusive); 0.50 = 50.
    pub t_rs_hundredths: u32,
    /// Bed availability in parts per million; 0.20 = 200000.
    pub availability_ppm: u32,
    pub policy: CmPolicy,
    /// Acceptance probability for `CmBernoulli`; ignored otherwise.
    pub bernoulli_prob: f64,
    pub seed: u64,
    pub max_rounds: u32,
    /// Run the blocking-pair audit after every round.
    pub verify: bool,
}

/// One offer as reported back to C.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CmOffer {
    pub round: u32,
    pub patient_id: u64,
    pub center_id: u32,
    pub accepted: bool,
}

/// Opaque state adjacency graph.
pub struct CmAdjacency(StateAdjacency);
/// Opaque validated center list.
pub struct CmCenters(Vec<CancerCenter>);
/// Opaque validated patient cohort.
pub struct CmPatients(Vec<Patient>);
/// Opaque scenario result.
pub struct CmOutcome(ScenarioOutcome);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: CmStatus, msg: impl Into<Vec<u8>>) -> CmStatus {
    let msg = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
    status
}

/// Message for the most recent failure on this thread; empty string when no
/// failure has occurred. Valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn cm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn load_error_status(e: &io::LoadError) -> CmStatus {
    match e {
        io::LoadError::Io { .. } => CmStatus::IoError,
        io::LoadError::Parse { .. } | io::LoadError::Adjacency(_) => CmStatus::ParseError,
        io::LoadError::Validation { .. } => CmStatus::ValidationError,
    }
}

unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, CmStatus> {
    if ptr.is_null() {
        return Err(fail(CmStatus::NullArgument, "path is null"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(fail(CmStatus::InvalidUtf8, "path is not valid UTF-8")),
    }
}

unsafe fn out_arg<'a, T>(ptr: *mut *mut T) -> Result<&'a mut *mut T, CmStatus> {
    if ptr.is_null() {
        Err(fail(CmStatus::NullArgument, "out pointer is null"))
    } else {
        Ok(&mut *ptr)
    }
}

unsafe fn ref_arg<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, CmStatus> {
    if ptr.is_null() {
        Err(fail(CmStatus::NullArgument, format!("{} is null", name)))
    } else {
        Ok(&*ptr)
    }
}

unsafe fn mut_arg<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, CmStatus> {
    if ptr.is_null() {
        Err(fail(CmStatus::NullArgument, format!("{} is null", name)))
    } else {
        Ok(&mut *ptr)
    }
}

fn guarded(body: impl FnOnce() -> CmStatus) -> CmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(CmStatus::InternalError, "internal panic"),
    }
}

/// Loads a state adjacency file (`STATE_A,STATE_B` lines, `#` comments,
/// single codes for isolated states).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cm_adjacency_load(
    path: *const c_char,
    out: *mut *mut CmAdjacency,
) -> CmStatus {
    guarded(|| {
        let (path, out) = match (path_arg(path), out_arg(out)) {
            (Ok(p), Ok(o)) => (p, o),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match io::load_adjacency(Path::new(&path)) {
            Ok(adj) => {
                *out = Box::into_raw(Box::new(CmAdjacency(adj)));
                CmStatus::Ok
            }
            Err(e) => fail(load_error_status(&e), e.to_string()),
        }
    })
}

/// Returns the shipped US adjacency table.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cm_adjacency_shipped(out: *mut *mut CmAdjacency) -> CmStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(o) => o,
            Err(s) => return s,
        };
        *out = Box::into_raw(Box::new(CmAdjacency(datasets::shipped_adjacency())));
        CmStatus::Ok
    })
}

/// # Safety
/// `ptr` must come from a `cm_adjacency_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn cm_adjacency_free(ptr: *mut CmAdjacency) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

/// Loads and validates a centers CSV against the adjacency's state set.
///
/// # Safety
/// All pointers must be valid; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cm_centers_load(
    path: *const c_char,
    adj: *const CmAdjacency,
    out: *mut *mut CmCenters,
) -> CmStatus {
    guarded(|| {
        let (path, adj, out) = match (path_arg(path), ref_arg(adj, "adjacency"), out_arg(out)) {
            (Ok(p), Ok(a), Ok(o)) => (p, a, o),
            (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
        };
        match io::load_centers(Path::new(&path), &adj.0) {
            Ok(centers) => {
                *out = Box::into_raw(Box::new(CmCenters(centers)));
                CmStatus::Ok
            }
            Err(e) => fail(load_error_status(&e), e.to_string()),
        }
    })
}

/// Returns the shipped 64-center dataset.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cm_centers_shipped(out: *mut *mut CmCenters) -> CmStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(o) => o,
            Err(s) => return s,
        };
        match datasets::shipped_centers() {
            Ok(centers) => {
                *out = Box::into_raw(Box::new(CmCenters(centers)));
                CmStatus::Ok
            }
            Err(e) => fail(load_error_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `centers` must come from a `cm_centers_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn cm_centers_count(centers: *const CmCenters) -> usize {
    if centers.is_null() {
        return 0;
    }
    (*centers).0.len()
}

/// Total staffed beds across the list.
///
/// # Safety
/// `centers` must come from a `cm_centers_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn cm_centers_total_beds(centers: *const CmCenters) -> u64 {
    if centers.is_null() {
        return 0;
    }
    (*centers)
        .0
        .iter()
        .map(|c| u64::from(c.staffed_beds_total))
        .sum()
}

/// # Safety
/// `ptr` must come from a `cm_centers_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn cm_centers_free(ptr: *mut CmCenters) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

/// Loads and validates a patients CSV against the adjacency's state set.
///
/// # Safety
/// All pointers must be valid; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cm_patients_load(
    path: *const c_char,
    adj: *const CmAdjacency,
    out: *mut *mut CmPatients,
) -> CmStatus {
    guarded(|| {
        let (path, adj, out) = match (path_arg(path), ref_arg(adj, "adjacency"), out_arg(out)) {
            (Ok(p), Ok(a), Ok(o)) => (p, a, o),
            (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
        };
        match io::load_patients(Path::new(&path), &adj.0) {
            Ok(patients) => {
                *out = Box::into_raw(Box::new(CmPatients(patients)));
                CmStatus::Ok
            }
            Err(e) => fail(load_error_status(&e), e.to_string()),
        }
    })
}

/// Deterministic synthetic cohort from the default model; same (n, seed)
/// always produces the same patients.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cm_patients_synthesize(
    n: u32,
    seed: u64,
    out: *mut *mut CmPatients,
) -> CmStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(o) => o,
            Err(s) => return s,
        };
        match synthesize_cohort(n, seed, &CohortSpec::default()) {
            Ok(patients) => {
                *out = Box::into_raw(Box::new(CmPatients(patients)));
                CmStatus::Ok
            }
            Err(e) => fail(CmStatus::ValidationError, e.to_string()),
        }
    })
}

/// # Safety
/// `patients` must come from a `cm_patients_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn cm_patients_count(patients: *const CmPatients) -> usize {
    if patients.is_null() {
        return 0;
    }
    (*patients).0.len()
}

/// # Safety
/// `ptr` must come from a `cm_patients_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn cm_patients_free(ptr: *mut CmPatients) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

fn build_config(cfg: &CmConfig) -> Result<MatchConfig, CmStatus> {
    let t_rs = u8::try_from(cfg.t_rs_hundredths)
        .ok()
        .and_then(RiskScore::from_hundredths)
        .ok_or_else(|| {
            fail(
                CmStatus::ValidationError,
                "t_rs_hundredths is outside 0..=100",
            )
        })?;
    let availability = AvailabilityFraction::from_ppm(cfg.availability_ppm)
        .map_err(|e| fail(CmStatus::ValidationError, e.to_string()))?;
    let policy = match cfg.policy {
        CmPolicy::AlwaysAccept => PolicySpec::AlwaysAccept,
        CmPolicy::Bernoulli => PolicySpec::Bernoulli {
            prob: cfg.bernoulli_prob,
        },
    };
    let config = MatchConfig {
        x_percent: cfg.x_percent,
        t_ad: Distance::from_halves(cfg.t_ad_halves),
        t_rs,
        availability,
        policy,
        rng_seed: cfg.seed,
        max_rounds: cfg.max_rounds,
    };
    config
        .validate()
        .map_err(|e| fail(CmStatus::ValidationError, e.to_string()))?;
    Ok(config)
}

/// Runs the multi-round assignment to completion.
///
/// # Safety
/// All pointers must be valid and come from the matching constructors.
#[no_mangle]
pub unsafe extern "C" fn cm_run(
    patients: *const CmPatients,
    centers: *const CmCenters,
    adj: *const CmAdjacency,
    cfg: *const CmConfig,
    out: *mut *mut CmOutcome,
) -> CmStatus {
    guarded(|| {
        let args = (
            ref_arg(patients, "patients"),
            ref_arg(centers, "centers"),
            ref_arg(adj, "adjacency"),
            ref_arg(cfg, "config"),
            out_arg(out),
        );
        let (patients, centers, adj, cfg, out) = match args {
            (Ok(p), Ok(c), Ok(a), Ok(k), Ok(o)) => (p, c, a, k, o),
            (Err(s), _, _, _, _)
            | (_, Err(s), _, _, _)
            | (_, _, Err(s), _, _)
            | (_, _, _, Err(s), _)
            | (_, _, _, _, Err(s)) => return s,
        };
        let config = match build_config(cfg) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let distances = DistanceTable::build(&adj.0);
        let opts = RunOptions {
            verify: cfg.verify,
            trace: false,
        };
        match run_to_completion(
            patients.0.clone(),
            centers.0.clone(),
            distances,
            config,
            opts,
        ) {
            Ok(outcome) => {
                *out = Box::into_raw(Box::new(CmOutcome(outcome)));
                CmStatus::Ok
            }
            Err(e @ RoundError::NoEligiblePatients) => {
                fail(CmStatus::NoEligiblePatients, e.to_string())
            }
            Err(e @ RoundError::StabilityViolation { .. }) => {
                fail(CmStatus::StabilityViolation, e.to_string())
            }
            Err(e) => fail(CmStatus::ValidationError, e.to_string()),
        }
    })
}

/// Number of rounds executed.
///
/// # Safety
/// `outcome` must come from `cm_run`.
#[no_mangle]
pub unsafe extern "C" fn cm_outcome_rounds(outcome: *const CmOutcome) -> u32 {
    if outcome.is_null() {
        return 0;
    }
    (*outcome).0.reports.len() as u32
}

/// Beds opened for assignment at the start of the run.
///
/// # Safety
/// `outcome` must come from `cm_run`.
#[no_mangle]
pub unsafe extern "C" fn cm_outcome_beds_available(outcome: *const CmOutcome) -> u64 {
    if outcome.is_null() {
        return 0;
    }
    (*outcome).0.beds_available()
}

/// Beds consumed by accepted offers.
///
/// # Safety
/// `outcome` must come from `cm_run`.
#[no_mangle]
pub unsafe extern "C" fn cm_outcome_beds_filled(outcome: *const CmOutcome) -> u64 {
    if outcome.is_null() {
        return 0;
    }
    (*outcome).0.beds_filled()
}

/// Eligible patients never matched.
///
/// # Safety
/// `outcome` must come from `cm_run`.
#[no_mangle]
pub unsafe extern "C" fn cm_outcome_unmatched(outcome: *const CmOutcome) -> u64 {
    if outcome.is_null() {
        return 0;
    }
    (*outcome).0.leftover.len() as u64
}

/// Number of offers across all rounds.
///
/// # Safety
/// `outcome` must come from `cm_run`.
#[no_mangle]
pub unsafe extern "C" fn cm_outcome_offer_count(outcome: *const CmOutcome) -> usize {
    if outcome.is_null() {
        return 0;
    }
    (*outcome).0.offers.len()
}

/// Copies offer `index` into `offer`.
///
/// # Safety
/// `outcome` must come from `cm_run`; `offer` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cm_outcome_offer(
    outcome: *const CmOutcome,
    index: usize,
    offer: *mut CmOffer,
) -> CmStatus {
    guarded(|| {
        let (outcome, slot) = match (ref_arg(outcome, "outcome"), mut_arg(offer, "offer")) {
            (Ok(o), Ok(s)) => (o, s),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let Some((round, record)) = outcome.0.offers.get(index) else {
            return fail(
                CmStatus::ValidationError,
                format!(
                    "offer index {} out of range ({})",
                    index,
                    outcome.0.offers.len()
                ),
            );
        };
        *slot = CmOffer {
            round: *round,
            patient_id: record.patient.0,
            center_id: record.center.0,
            accepted: record.accepted,
        };
        CmStatus::Ok
    })
}

/// # Safety
/// `ptr` must come from `cm_run` or be null.
#[no_mangle]
pub unsafe extern "C" fn cm_outcome_free(ptr: *mut CmOutcome) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}
