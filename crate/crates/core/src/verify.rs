//! Independent correctness oracles: an exhaustive blocking-pair audit and a
//! brute-force stable matching for tiny instances. Neither shares code with
//! the engine's matching path.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::domain::{CenterId, PatientId};
use crate::engine::{MatchInstance, MatchOutcome};

/// Why a (patient, center) pair blocks a matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockingReason {
    /// The center has a free bed the patient would take.
    FreeBedPreferred,
    /// The patient outranks the center's lowest-priority occupant.
    WouldDisplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockingPair {
    pub patient: PatientId,
    pub center: CenterId,
    pub reason: BlockingReason,
}

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("no stable matching found; the enumerator is buggy")]
    NoStableMatchingFound,
    #[error("{0} stable matchings found where the master priority list guarantees one")]
    MultipleStableMatchings(usize),
    #[error("instance too large for brute force: {patients} patients, {beds} beds")]
    InstanceTooLarge { patients: usize, beds: u64 },
}

/// Scans every (patient, center) pair where the center precedes the
/// patient's assignment in its *original* preference list (all of it for
/// waiting or unassigned patients). A pair blocks when the center has a free
/// bed, or its lowest-priority occupant ranks strictly below the patient in
/// the master order. Empty result means the matching is stable.
pub fn find_blocking_pairs(instance: &MatchInstance, outcome: &MatchOutcome) -> Vec<BlockingPair> {
    let assigned: BTreeMap<PatientId, CenterId> = outcome.matches.iter().copied().collect();
    let capacity: BTreeMap<CenterId, u32> = instance.capacities.iter().copied().collect();

    // Lowest-priority occupant per center under the master order.
    let mut occupants: BTreeMap<CenterId, Vec<usize>> = BTreeMap::new();
    for (i, p) in instance.patients.iter().enumerate() {
        if let Some(&c) = assigned.get(&p.id) {
            occupants.entry(c).or_default().push(i);
        }
    }
    let worst_occupant: BTreeMap<CenterId, usize> = occupants
        .iter()
        .map(|(&c, list)| {
            let &worst = list
                .iter()
                .max_by_key(|&&i| instance.patients[i].priority())
                .expect("occupant lists are nonempty");
            (c, worst)
        })
        .collect();

    let mut pairs = Vec::new();
    for (i, p) in instance.patients.iter().enumerate() {
        let prefs = &instance.preferences[i];
        let cutoff = match assigned.get(&p.id) {
            Some(c) => prefs.iter().position(|x| x == c).unwrap_or(prefs.len()),
            None => prefs.len(),
        };
        for &c in &prefs[..cutoff] {
            let cap = capacity.get(&c).copied().unwrap_or(0);
            let used = occupants.get(&c).map_or(0, |l| l.len() as u32);
            if used < cap {
                pairs.push(BlockingPair {
                    patient: p.id,
                    center: c,
                    reason: BlockingReason::FreeBedPreferred,
                });
            } else if let Some(&worst) = worst_occupant.get(&c) {
                if p.priority() < instance.patients[worst].priority() {
                    pairs.push(BlockingPair {
                        patient: p.id,
                        center: c,
                        reason: BlockingReason::WouldDisplace,
                    });
                }
            }
        }
    }
    pairs
}

/// Enumerates every capacity-respecting assignment of a tiny instance and
/// returns the unique stable one. Patients left out by a candidate
/// assignment are reported in `unassigned`; `waiting` is always empty here.
pub fn brute_force_match(instance: &MatchInstance) -> Result<MatchOutcome, VerifyError> {
    let n = instance.patients.len();
    let beds = instance.total_beds();
    if n > 10 || beds > 5 {
        return Err(VerifyError::InstanceTooLarge { patients: n, beds });
    }

    let mut capacity: BTreeMap<CenterId, u32> = instance.capacities.iter().copied().collect();
    let mut assignment: Vec<Option<CenterId>> = vec![None; n];
    let mut stable: Vec<Vec<Option<CenterId>>> = Vec::new();

    fn recurse(
        i: usize,
        instance: &MatchInstance,
        capacity: &mut BTreeMap<CenterId, u32>,
        assignment: &mut Vec<Option<CenterId>>,
        stable: &mut Vec<Vec<Option<CenterId>>>,
    ) {
        if i == instance.patients.len() {
            if is_stable(instance, assignment) {
                stable.push(assignment.clone());
            }
            return;
        }
        assignment[i] = None;
        recurse(i + 1, instance, capacity, assignment, stable);
        for &c in &instance.preferences[i] {
            let free = capacity
                .get_mut(&c)
                .expect("preferences reference known centers");
            if *free > 0 {
                *free -= 1;
                assignment[i] = Some(c);
                recurse(i + 1, instance, capacity, assignment, stable);
                assignment[i] = None;
                *capacity.get_mut(&c).unwrap() += 1;
            }
        }
    }

    fn is_stable(instance: &MatchInstance, assignment: &[Option<CenterId>]) -> bool {
        let outcome = MatchOutcome {
            matches: {
                let mut m: Vec<(PatientId, CenterId)> = assignment
                    .iter()
                    .enumerate()
                    .filter_map(|(i, c)| c.map(|c| (instance.patients[i].id, c)))
                    .collect();
                m.sort_by_key(|&(p, _)| p);
                m
            },
            waiting: Vec::new(),
            unassigned: assignment
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_none())
                .map(|(i, _)| instance.patients[i].id)
                .collect(),
            proposal_count: 0,
        };
        find_blocking_pairs(instance, &outcome).is_empty()
    }

    recurse(0, instance, &mut capacity, &mut assignment, &mut stable);

    match stable.len() {
        0 => Err(VerifyError::NoStableMatchingFound),
        1 => {
            let chosen = &stable[0];
            let mut matches: Vec<(PatientId, CenterId)> = chosen
                .iter()
                .enumerate()
                .filter_map(|(i, c)| c.map(|c| (instance.patients[i].id, c)))
                .collect();
            matches.sort_by_key(|&(p, _)| p);
            Ok(MatchOutcome {
                matches,
                waiting: Vec::new(),
                unassigned: chosen
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.is_none())
                    .map(|(i, _)| instance.patients[i].id)
                    .collect(),
                proposal_count: 0,
            })
        }
        k => Err(VerifyError::MultipleStableMatchings(k)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::RiskScore;
    use crate::engine::{check_equals_serial_dictatorship, EligiblePatient, EngineState};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn instance(patients: &[(u64, u8)], prefs: &[&[u32]], caps: &[(u32, u32)]) -> MatchInstance {
        MatchInstance {
            patients: patients
                .iter()
                .map(|&(id, h)| EligiblePatient {
                    id: PatientId(id),
                    risk: RiskScore::from_hundredths(h).unwrap(),
                })
                .collect(),
            preferences: prefs
                .iter()
                .map(|list| list.iter().map(|&c| CenterId(c)).collect())
                .collect(),
            capacities: caps.iter().map(|&(id, c)| (CenterId(id), c)).collect(),
        }
    }

    #[test]
    fn engine_output_has_no_blocking_pairs() {
        let inst = instance(
            &[(1, 90), (2, 85), (3, 70), (4, 60)],
            &[&[1, 2], &[1], &[2, 1], &[2]],
            &[(1, 1), (2, 2)],
        );
        let out = EngineState::initialize(&inst).run_inner();
        assert_eq!(find_blocking_pairs(&inst, &out), Vec::new());
    }

    #[test]
    fn hand_built_unstable_matching_is_flagged() {
        // High-risk patient left unassigned while its listed center has a
        // free bed.
        let inst = instance(&[(1, 90)], &[&[1]], &[(1, 1)]);
        let out = MatchOutcome {
            matches: vec![],
            waiting: vec![],
            unassigned: vec![PatientId(1)],
            proposal_count: 0,
        };
        assert_eq!(
            find_blocking_pairs(&inst, &out),
            vec![BlockingPair {
                patient: PatientId(1),
                center: CenterId(1),
                reason: BlockingReason::FreeBedPreferred,
            }]
        );
    }

    #[test]
    fn would_displace_is_flagged() {
        // Low-risk patient seated while a higher-risk one is left out.
        let inst = instance(&[(1, 90), (2, 60)], &[&[1], &[1]], &[(1, 1)]);
        let out = MatchOutcome {
            matches: vec![(PatientId(2), CenterId(1))],
            waiting: vec![PatientId(1)],
            unassigned: vec![],
            proposal_count: 0,
        };
        assert_eq!(
            find_blocking_pairs(&inst, &out),
            vec![BlockingPair {
                patient: PatientId(1),
                center: CenterId(1),
                reason: BlockingReason::WouldDisplace,
            }]
        );
    }

    #[test]
    fn empty_matching_with_zero_capacity_is_stable() {
        let inst = instance(&[(1, 90)], &[&[1]], &[(1, 0)]);
        let out = MatchOutcome {
            matches: vec![],
            waiting: vec![PatientId(1)],
            unassigned: vec![],
            proposal_count: 0,
        };
        assert_eq!(find_blocking_pairs(&inst, &out), Vec::new());
    }

    #[test]
    fn brute_force_trivial_cases() {
        let inst = instance(&[(1, 90)], &[&[1]], &[(1, 1)]);
        let out = brute_force_match(&inst).unwrap();
        assert_eq!(out.matches, vec![(PatientId(1), CenterId(1))]);

        let inst = instance(&[(1, 90), (2, 80)], &[&[1], &[1]], &[(1, 1)]);
        let out = brute_force_match(&inst).unwrap();
        assert_eq!(out.matches, vec![(PatientId(1), CenterId(1))]);
        assert_eq!(out.unassigned, vec![PatientId(2)]);

        let inst = instance(&[(1, 90), (2, 80)], &[&[1], &[1]], &[(1, 0)]);
        let out = brute_force_match(&inst).unwrap();
        assert!(out.matches.is_empty());
    }

    #[test]
    fn brute_force_rejects_oversized_instances() {
        let pats: Vec<(u64, u8)> = (1..=11).map(|i| (i, i as u8)).collect();
        let prefs: Vec<&[u32]> = vec![&[1]; 11];
        let inst = instance(&pats, &prefs, &[(1, 1)]);
        assert!(matches!(
            brute_force_match(&inst),
            Err(VerifyError::InstanceTooLarge { .. })
        ));
    }

    /// Random tiny instance with distinct risks.
    fn random_tiny(rng: &mut ChaCha8Rng) -> MatchInstance {
        let n = rng.gen_range(1..=8usize);
        let m = rng.gen_range(1..=4usize);
        let mut risks: Vec<u8> = (0..=100).collect();
        for i in (1..risks.len()).rev() {
            let j = rng.gen_range(0..=i);
            risks.swap(i, j);
        }
        let patients: Vec<EligiblePatient> = (0..n)
            .map(|i| EligiblePatient {
                id: PatientId(i as u64 + 1),
                risk: RiskScore::from_hundredths(risks[i]).unwrap(),
            })
            .collect();
        let preferences: Vec<Vec<CenterId>> = (0..n)
            .map(|_| {
                let mut list: Vec<CenterId> = (1..=m as u32)
                    .filter(|_| rng.gen_bool(0.6))
                    .map(CenterId)
                    .collect();
                for i in (1..list.len()).rev() {
                    let j = rng.gen_range(0..=i);
                    list.swap(i, j);
                }
                list
            })
            .collect();
        let mut remaining = 5u32;
        let capacities: Vec<(CenterId, u32)> = (1..=m as u32)
            .map(|c| {
                let cap = rng.gen_range(0..=remaining.min(3));
                remaining -= cap;
                (CenterId(c), cap)
            })
            .collect();
        MatchInstance {
            patients,
            preferences,
            capacities,
        }
    }

    #[test]
    fn cross_oracle_equivalence_on_random_tiny_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(9001);
        for _ in 0..300 {
            let inst = random_tiny(&mut rng);
            let engine_out = EngineState::initialize(&inst).run_inner();
            assert_eq!(find_blocking_pairs(&inst, &engine_out), Vec::new());
            assert!(check_equals_serial_dictatorship(&engine_out, &inst));
            let brute = brute_force_match(&inst).unwrap();
            assert_eq!(brute.matches, engine_out.matches);
        }
    }
}
