//! Risk-ranked assignment of cancer patients to treatment centers with
//! limited staffed beds.
//!
//! The pipeline: validate patients and centers, rank patients by a
//! fixed-granularity risk score, build per-patient center lists filtered by
//! hop distance and affordability, then run a deferred-acceptance match with
//! displacement inside a multi-round offer/accept loop until no bed that
//! anyone can use remains open. Independent oracles (blocking-pair audit,
//! brute-force enumeration, serial dictatorship) verify every run.

pub mod datasets;
pub mod domain;
pub mod engine;
pub mod geo;
pub mod io;
pub mod preferences;
pub mod riskrank;
pub mod rounds;
pub mod verify;
