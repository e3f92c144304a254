//! Per-patient ordered center lists built from affordability and
//! accessibility, sorted nearest-first with a distance-keyed bucket sort.

use crate::domain::{CancerCenter, CenterId, Distance, MatchConfig, Patient, PatientId};
use crate::geo::{is_accessible, DistanceTable};

/// One qualifying center for a patient, carrying the sort keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreferenceEntry {
    pub center: CenterId,
    pub distance: Distance,
    pub cost: u64,
}

/// Ordered center list for one patient, nearest-first; ties broken by
/// ascending treatment cost, then ascending center id. May be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceList {
    pub patient: PatientId,
    pub entries: Vec<PreferenceEntry>,
}

impl PreferenceList {
    pub fn center_ids(&self) -> Vec<CenterId> {
        self.entries.iter().map(|e| e.center).collect()
    }
}

/// `floor(annual_income * x_percent / 100)` in whole USD.
pub fn affordable_cost(annual_income: u64, x_percent: u32) -> u64 {
    (u128::from(annual_income) * u128::from(x_percent) / 100) as u64
}

/// A center is affordable iff its cost does not exceed the patient's budget.
pub fn is_affordable(patient: &Patient, center: &CancerCenter, x_percent: u32) -> bool {
    center.treatment_cost <= affordable_cost(patient.annual_income, x_percent)
}

/// Stable bucket sort on integer-halves distance; within a bucket, sorts by
/// (cost, center id). All entries must already be below the distance cutoff.
pub fn bucket_sort_by_distance(entries: Vec<PreferenceEntry>) -> Vec<PreferenceEntry> {
    let Some(max_halves) = entries.iter().map(|e| e.distance.halves()).max() else {
        return Vec::new();
    };
    let mut buckets: Vec<Vec<PreferenceEntry>> = vec![Vec::new(); max_halves as usize + 1];
    for e in entries {
        buckets[e.distance.halves() as usize].push(e);
    }
    let mut out = Vec::with_capacity(buckets.iter().map(Vec::len).sum());
    for mut bucket in buckets {
        bucket.sort_by_key(|e| (e.cost, e.center));
        out.extend(bucket);
    }
    out
}

/// Builds one patient's preference list: keep centers that are accessible
/// (distance strictly below `t_ad`) and affordable, bucket-sorted by
/// distance. Capacity is deliberately ignored here; full centers stay listed.
pub fn build_preference_list(
    patient: &Patient,
    centers: &[CancerCenter],
    distances: &DistanceTable,
    cfg: &MatchConfig,
) -> PreferenceList {
    let budget = affordable_cost(patient.annual_income, cfg.x_percent);
    let mut entries = Vec::new();
    for center in centers {
        if center.treatment_cost > budget {
            continue;
        }
        let Ok(Some(d)) = distances.get(patient.state, center.state) else {
            // Unreachable or unknown center state: excluded.
            continue;
        };
        if is_accessible(d, cfg.t_ad) {
            entries.push(PreferenceEntry {
                center: center.id,
                distance: d,
                cost: center.treatment_cost,
            });
        }
    }
    PreferenceList {
        patient: patient.id,
        entries: bucket_sort_by_distance(entries),
    }
}
