//! Core value types shared by every other module: identifiers, fixed-point
//! risk scores and distances, patients, centers, and the match configuration.
//!
//! Everything here is immutable after validation and safe to share across
//! threads; validation itself is pure.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

/// Unique patient identifier within a cohort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatientId(pub u64);

impl fmt::Display for PatientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Unique center identifier within a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CenterId(pub u32);

impl fmt::Display for CenterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Two-letter US postal state code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateCode([u8; 2]);

impl StateCode {
    /// Parses a two-letter code, accepting lowercase input. Syntax only;
    /// membership in the adjacency table is checked at validation time.
    pub fn parse(s: &str) -> Option<StateCode> {
        let bytes = s.as_bytes();
        if bytes.len() != 2 {
            return None;
        }
        let a = bytes[0].to_ascii_uppercase();
        let b = bytes[1].to_ascii_uppercase();
        if a.is_ascii_uppercase() && b.is_ascii_uppercase() {
            Some(StateCode([a, b]))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("state codes are ASCII")
    }
}

impl fmt::Display for StateCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StateCode {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StateCode::parse(s).ok_or_else(|| ValidationError::UnknownState {
            given: s.to_string(),
        })
    }
}

/// Relative risk in [0, 1] with a fixed 0.01 granularity, stored as an
/// integer number of hundredths so ordering and tie detection are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RiskScore(u8);

impl RiskScore {
    pub const MIN: RiskScore = RiskScore(0);
    pub const MAX: RiskScore = RiskScore(100);

    pub fn from_hundredths(h: u8) -> Option<RiskScore> {
        (h <= 100).then_some(RiskScore(h))
    }

    pub fn hundredths(&self) -> u8 {
        self.0
    }

    pub fn as_f64(&self) -> f64 {
        f64::from(self.0) / 100.0
    }

    /// Quantizes to hundredths by round-half-away-from-zero on the given
    /// float value (round-half-up for the nonnegative scores used here).
    pub fn from_f64(v: f64) -> Result<RiskScore, ValidationError> {
        if !v.is_finite() {
            return Err(ValidationError::RiskOutOfRange {
                value: v.to_string(),
            });
        }
        let h = (v * 100.0).round();
        if !(0.0..=100.0).contains(&h) {
            return Err(ValidationError::RiskOutOfRange {
                value: v.to_string(),
            });
        }
        Ok(RiskScore(h as u8))
    }

    /// Parses exact decimal text (e.g. `0.75`, `1`, `.505`) and quantizes to
    /// hundredths by round-half-up on the third fractional digit. Text-based
    /// so that inputs like `0.015` round up exactly, which a lossy f64
    /// round-trip would not guarantee.
    pub fn parse_decimal(s: &str) -> Result<RiskScore, ValidationError> {
        let s = s.trim();
        let malformed = || ValidationError::MalformedRiskScore {
            value: s.to_string(),
        };
        let out_of_range = || ValidationError::RiskOutOfRange {
            value: s.to_string(),
        };
        if s.starts_with('-') {
            // Negative scores are rejected outright; round-half-up is only
            // defined here for the nonnegative range.
            return Err(out_of_range());
        }
        let body = s.strip_prefix('+').unwrap_or(s);
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(malformed());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(malformed());
        }
        let whole: u32 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| out_of_range())?
        };
        let mut frac = frac_part.bytes().map(|b| u32::from(b - b'0'));
        let d1 = frac.next().unwrap_or(0);
        let d2 = frac.next().unwrap_or(0);
        let round_up = frac.next().is_some_and(|d3| d3 >= 5);
        let hundredths = whole
            .checked_mul(100)
            .and_then(|h| h.checked_add(d1 * 10 + d2))
            .and_then(|h| h.checked_add(u32::from(round_up)))
            .ok_or_else(out_of_range)?;
        u8::try_from(hundredths)
            .ok()
            .and_then(RiskScore::from_hundredths)
            .ok_or_else(out_of_range)
    }
}

impl fmt::Display for RiskScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

/// Hop-model distance with 0.5 granularity, stored as integer halves so all
/// comparisons are exact (own state = 0.5 is the only non-integer value).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distance(u32);

impl Distance {
    /// Distance to a center in the patient's own residency state.
    pub const OWN_STATE: Distance = Distance(1);

    pub fn from_halves(halves: u32) -> Distance {
        Distance(halves)
    }

    /// Distance for `hops` >= 1 neighbor steps (1 hop = 1.0 = 2 halves).
    pub fn from_hops(hops: u32) -> Distance {
        Distance(hops * 2)
    }

    pub fn halves(&self) -> u32 {
        self.0
    }

    pub fn as_f64(&self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// Parses decimal text with a `.0` or `.5` fraction (or none).
    pub fn parse_decimal(s: &str) -> Result<Distance, ValidationError> {
        let s = s.trim();
        let malformed = || ValidationError::MalformedDistance {
            value: s.to_string(),
        };
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, "0"),
        };
        let whole: u32 = int_part.parse().map_err(|_| malformed())?;
        let half = match frac_part {
            "0" | "" | "00" => 0,
            "5" | "50" => 1,
            _ => return Err(malformed()),
        };
        whole
            .checked_mul(2)
            .and_then(|h| h.checked_add(half))
            .map(Distance)
            .ok_or_else(malformed)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{}",
            self.0 / 2,
            if self.0.is_multiple_of(2) { "0" } else { "5" }
        )
    }
}

/// Fraction of staffed beds opened for assignment, stored as integer
/// parts-per-million so `floor(sb * fraction)` is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AvailabilityFraction(u32);

impl AvailabilityFraction {
    pub const FULL: AvailabilityFraction = AvailabilityFraction(1_000_000);

    pub fn from_ppm(ppm: u32) -> Result<AvailabilityFraction, ValidationError> {
        if ppm == 0 || ppm > 1_000_000 {
            return Err(ValidationError::AvailabilityOutOfRange {
                value: format!("{}e-6", ppm),
            });
        }
        Ok(AvailabilityFraction(ppm))
    }

    pub fn ppm(&self) -> u32 {
        self.0
    }

    /// Parses decimal text in (0, 1] with at most six fractional digits.
    pub fn parse_decimal(s: &str) -> Result<AvailabilityFraction, ValidationError> {
        let s = s.trim();
        let malformed = || ValidationError::MalformedFraction {
            value: s.to_string(),
        };
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if frac_part.len() > 6 || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        let whole: u32 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| malformed())?
        };
        let mut frac_ppm: u32 = 0;
        for (i, b) in frac_part.bytes().enumerate() {
            frac_ppm += u32::from(b - b'0') * 10u32.pow(5 - i as u32);
        }
        let ppm = whole
            .checked_mul(1_000_000)
            .and_then(|p| p.checked_add(frac_ppm))
            .ok_or_else(malformed)?;
        AvailabilityFraction::from_ppm(ppm)
    }

    /// `floor(beds * fraction)` in exact integer arithmetic.
    pub fn apply(&self, beds: u32) -> u32 {
        (u64::from(beds) * u64::from(self.0) / 1_000_000) as u32
    }
}

impl fmt::Display for AvailabilityFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / 1_000_000;
        let frac = self.0 % 1_000_000;
        if frac == 0 {
            write!(f, "{}", whole)
        } else {
            let s = format!("{:06}", frac);
            write!(f, "{}.{}", whole, s.trim_end_matches('0'))
        }
    }
}

/// A validated cohort member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patient {
    pub id: PatientId,
    pub state: StateCode,
    /// Annual income in whole USD.
    pub annual_income: u64,
    pub risk_score: RiskScore,
}

/// Treatment-providing center classification. Basic Laboratory centers are
/// rejected at ingestion and never reach this type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterType {
    Comprehensive,
    CancerCenter,
}

impl CenterType {
    pub fn as_str(&self) -> &'static str {
        match self {
            CenterType::Comprehensive => "3C",
            CenterType::CancerCenter => "2C",
        }
    }
}

impl fmt::Display for CenterType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A validated treatment center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CancerCenter {
    pub id: CenterId,
    pub name: String,
    pub city: String,
    pub state: StateCode,
    pub center_type: CenterType,
    pub staffed_beds_total: u32,
    /// Treatment cost in whole USD, strictly positive.
    pub treatment_cost: u64,
    /// Beds still open for assignment; starts at `staffed_beds_total` and is
    /// reduced when an availability fraction is applied or offers accepted.
    pub beds_remaining: u32,
}

/// How simulated patients respond to offers. The scripted variant points at
/// a decision file resolved when the rounds run.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    AlwaysAccept,
    Bernoulli { prob: f64 },
    Scripted { path: PathBuf },
}

/// Thresholds and knobs for one matching scenario.
#[derive(Debug, Clone)]
pub struct MatchConfig {
    /// The x of `ac_i = a_i * x%`, integer percent in (0, 100].
    pub x_percent: u32,
    /// Accessible-distance threshold; centers at `distance < t_ad` qualify.
    pub t_ad: Distance,
    /// Risk threshold; patients with `risk >= t_rs` are eligible.
    pub t_rs: RiskScore,
    pub availability: AvailabilityFraction,
    pub policy: PolicySpec,
    pub rng_seed: u64,
    pub max_rounds: u32,
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.x_percent == 0 || self.x_percent > 100 {
            return Err(ValidationError::XPercentOutOfRange {
                value: self.x_percent,
            });
        }
        if self.t_ad.halves() == 0 {
            return Err(ValidationError::NonPositiveThreshold { name: "t_ad" });
        }
        if self.max_rounds == 0 {
            return Err(ValidationError::NonPositiveThreshold { name: "max_rounds" });
        }
        if let PolicySpec::Bernoulli { prob } = self.policy {
            if !(0.0..=1.0).contains(&prob) {
                return Err(ValidationError::BernoulliProbOutOfRange { value: prob });
            }
        }
        Ok(())
    }
}

/// Raw patient row as read from input, before validation.
#[derive(Debug, Clone)]
pub struct PatientRecord {
    pub id: u64,
    pub state: String,
    pub annual_income: i64,
    pub risk_score: String,
}

/// Raw center row as read from input, before validation.
#[derive(Debug, Clone)]
pub struct CenterRecord {
    pub id: u32,
    pub name: String,
    pub city: String,
    pub state: String,
    pub center_type: String,
    pub staffed_beds: u32,
    pub treatment_cost: i64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("patient {id}: annual income {income} is negative")]
    NegativeIncome { id: u64, income: i64 },
    #[error("risk score {value} is outside [0.00, 1.00]")]
    RiskOutOfRange { value: String },
    #[error("risk score {value:?} is not a decimal number")]
    MalformedRiskScore { value: String },
    #[error("state {given:?} is not a postal code in the adjacency table")]
    UnknownState { given: String },
    #[error("duplicate id {id}")]
    DuplicateId { id: u64 },
    #[error("center {id} is a Basic Laboratory and provides no treatment")]
    BasicLaboratoryExcluded { id: u32 },
    #[error("center {id}: treatment cost {cost} must be positive")]
    NonPositiveCost { id: u32, cost: i64 },
    #[error("center type {given:?} is not one of 3C, 2C, BasicLab")]
    UnknownCenterType { given: String },
    #[error("distance {value:?} must be a nonnegative multiple of 0.5")]
    MalformedDistance { value: String },
    #[error("fraction {value:?} must be decimal with at most 6 fractional digits")]
    MalformedFraction { value: String },
    #[error("availability fraction {value} is outside (0, 1]")]
    AvailabilityOutOfRange { value: String },
    #[error("x percent {value} is outside (0, 100]")]
    XPercentOutOfRange { value: u32 },
    #[error("{name} must be positive")]
    NonPositiveThreshold { name: &'static str },
    #[error("bernoulli probability {value} is outside [0, 1]")]
    BernoulliProbOutOfRange { value: f64 },
}

/// Validates one patient row against the known-state set, registering its id
/// in `seen_ids`. The risk score is quantized to hundredths by round-half-up.
pub fn validate_patient(
    raw: &PatientRecord,
    known_states: &BTreeSet<StateCode>,
    seen_ids: &mut BTreeSet<u64>,
) -> Result<Patient, ValidationError> {
    let state = StateCode::parse(&raw.state)
        .filter(|s| known_states.contains(s))
        .ok_or_else(|| ValidationError::UnknownState {
            given: raw.state.clone(),
        })?;
    if raw.annual_income < 0 {
        return Err(ValidationError::NegativeIncome {
            id: raw.id,
            income: raw.annual_income,
        });
    }
    let risk_score = RiskScore::parse_decimal(&raw.risk_score)?;
    if !seen_ids.insert(raw.id) {
        return Err(ValidationError::DuplicateId { id: raw.id });
    }
    Ok(Patient {
        id: PatientId(raw.id),
        state,
        annual_income: raw.annual_income as u64,
        risk_score,
    })
}

/// Validates one center row. Basic Laboratory rows get a dedicated error so
/// ingestion can skip and log them; zero staffed beds is valid (never
/// matchable).
pub fn validate_center(
    raw: &CenterRecord,
    known_states: &BTreeSet<StateCode>,
    seen_ids: &mut BTreeSet<u32>,
) -> Result<CancerCenter, ValidationError> {
    let center_type = match raw.center_type.as_str() {
        "3C" | "Comprehensive" => CenterType::Comprehensive,
        "2C" | "CancerCenter" => CenterType::CancerCenter,
        "BasicLab" | "BasicLaboratory" => {
            return Err(ValidationError::BasicLaboratoryExcluded { id: raw.id })
        }
        other => {
            return Err(ValidationError::UnknownCenterType {
                given: other.to_string(),
            })
        }
    };
    let state = StateCode::parse(&raw.state)
        .filter(|s| known_states.contains(s))
        .ok_or_else(|| ValidationError::UnknownState {
            given: raw.state.clone(),
        })?;
    if raw.treatment_cost <= 0 {
        return Err(ValidationError::NonPositiveCost {
            id: raw.id,
            cost: raw.treatment_cost,
        });
    }
    if !seen_ids.insert(raw.id) {
        return Err(ValidationError::DuplicateId {
            id: u64::from(raw.id),
        });
    }
    Ok(CancerCenter {
        id: CenterId(raw.id),
        name: raw.name.clone(),
        city: raw.city.clone(),
        state,
        center_type,
        staffed_beds_total: raw.staffed_beds,
        treatment_cost: raw.treatment_cost as u64,
        beds_remaining: raw.staffed_beds,
    })
}
