//! Risk-score ingestion, bucket-sorted ranking, and synthetic cohort
//! generation. Risk scores are inputs here, never computed: the survival
//! model that produces them lives upstream of this crate.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::{Patient, PatientId, RiskScore, StateCode};

/// Map from patient id to risk score with a provenance tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiskTable {
    pub scores: BTreeMap<PatientId, RiskScore>,
    pub provenance: String,
}

impl RiskTable {
    pub fn from_cohort(patients: &[Patient], provenance: &str) -> RiskTable {
        RiskTable {
            scores: patients.iter().map(|p| (p.id, p.risk_score)).collect(),
            provenance: provenance.to_string(),
        }
    }

    pub fn get(&self, id: PatientId) -> Option<RiskScore> {
        self.scores.get(&id).copied()
    }

    /// True iff every cohort member has exactly one entry.
    pub fn covers(&self, patients: &[Patient]) -> bool {
        patients.len() == self.scores.len()
            && patients.iter().all(|p| self.scores.contains_key(&p.id))
    }
}

/// Sorts descending by risk with 101 buckets keyed by hundredths (0..=100),
/// one pass to fill, emitted from bucket 100 downward; ties within a bucket
/// break by ascending patient id.
pub fn bucket_sort_by_risk(patients: Vec<Patient>) -> Vec<Patient> {
    let total = patients.len();
    let mut buckets: Vec<Vec<Patient>> = vec![Vec::new(); 101];
    for p in patients {
        buckets[p.risk_score.hundredths() as usize].push(p);
    }
    let mut out = Vec::with_capacity(total);
    for mut bucket in buckets.into_iter().rev() {
        bucket.sort_by_key(|p| p.id);
        out.extend(bucket);
    }
    out
}

/// Number of distinct occupied risk buckets.
pub fn occupied_buckets(patients: &[Patient]) -> usize {
    let mut seen = [false; 101];
    for p in patients {
        seen[p.risk_score.hundredths() as usize] = true;
    }
    seen.iter().filter(|&&b| b).count()
}

/// Per-state sampling weight and income model for one synthetic cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortStateModel {
    pub state: StateCode,
    pub weight: u32,
    /// Mean annual income in whole USD; samples are uniform within
    /// `mean * (1 ± spread)`.
    pub income_mean: u64,
}

/// Configuration for [`synthesize_cohort`].
#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub states: Vec<CohortStateModel>,
    /// Income half-spread in percent (30 = uniform on [0.7, 1.3] * mean).
    pub income_spread_pct: u32,
    /// Inclusive risk range; scores are uniform over hundredths within it.
    pub risk_lo: RiskScore,
    pub risk_hi: RiskScore,
}

impl Default for CohortSpec {
    /// Cohort drawn from the contiguous breast-cancer registry states, with
    /// synthetic per-state mean incomes. Weights are calibrated so each
    /// region's demand covers the staffed beds reachable from it under the
    /// default thresholds (x = 25, cutoff 3, availability 0.20). Risk floor
    /// is 0.50: lower scores are rare in practice and excluded by default.
    fn default() -> CohortSpec {
        let st = |code: &str| StateCode::parse(code).expect("static state codes");
        let states = vec![
            CohortStateModel {
                state: st("CA"),
                weight: 1480,
                income_mean: 84_000,
            },
            CohortStateModel {
                state: st("CT"),
                weight: 960,
                income_mean: 83_000,
            },
            CohortStateModel {
                state: st("GA"),
                weight: 1130,
                income_mean: 66_000,
            },
            CohortStateModel {
                state: st("IA"),
                weight: 2510,
                income_mean: 65_000,
            },
            CohortStateModel {
                state: st("KY"),
                weight: 1940,
                income_mean: 55_000,
            },
            CohortStateModel {
                state: st("LA"),
                weight: 450,
                income_mean: 53_000,
            },
            CohortStateModel {
                state: st("NJ"),
                weight: 700,
                income_mean: 89_000,
            },
            CohortStateModel {
                state: st("NM"),
                weight: 390,
                income_mean: 54_000,
            },
            CohortStateModel {
                state: st("UT"),
                weight: 440,
                income_mean: 79_000,
            },
        ];
        CohortSpec {
            states,
            income_spread_pct: 30,
            risk_lo: RiskScore::from_hundredths(50).expect("static bound"),
            risk_hi: RiskScore::from_hundredths(100).expect("static bound"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthesisError {
    #[error("cohort size must be positive")]
    EmptyCohort,
    #[error("cohort spec needs at least one state with positive weight")]
    NoStates,
    #[error("risk range is inverted")]
    InvertedRiskRange,
}

/// Deterministic synthetic cohort: same (n, seed, spec) always yields the
/// same patients, ids 1..=n.
pub fn synthesize_cohort(
    n: u32,
    seed: u64,
    spec: &CohortSpec,
) -> Result<Vec<Patient>, SynthesisError> {
    if n == 0 {
        return Err(SynthesisError::EmptyCohort);
    }
    if spec.states.is_empty() || spec.states.iter().all(|s| s.weight == 0) {
        return Err(SynthesisError::NoStates);
    }
    if spec.risk_lo > spec.risk_hi {
        return Err(SynthesisError::InvertedRiskRange);
    }
    let weights = WeightedIndex::new(spec.states.iter().map(|s| u64::from(s.weight)))
        .map_err(|_| SynthesisError::NoStates)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = u64::from(spec.income_spread_pct.min(100));
    let mut cohort = Vec::with_capacity(n as usize);
    for id in 1..=u64::from(n) {
        let model = &spec.states[weights.sample(&mut rng)];
        let lo = model.income_mean * (100 - spread) / 100;
        let hi = model.income_mean * (100 + spread) / 100;
        let annual_income = rng.gen_range(lo..=hi);
        let risk = rng.gen_range(spec.risk_lo.hundredths()..=spec.risk_hi.hundredths());
        cohort.push(Patient {
            id: PatientId(id),
            state: model.state,
            annual_income,
            risk_score: RiskScore::from_hundredths(risk).expect("sampled within range"),
        });
    }
    Ok(cohort)
}
