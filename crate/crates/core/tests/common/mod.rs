//! Shared randomized-instance generators for the integration suites.

use carematch::domain::{CenterId, Distance, PatientId, RiskScore};
use carematch::engine::{EligiblePatient, MatchInstance};
use carematch::preferences::{bucket_sort_by_distance, PreferenceEntry};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random instance with n in [1, 200], m in [1, 16]; risk scores may tie.
/// Preference lists are built the production way: filter by strict distance
/// cutoff and budget, then bucket-sort by (distance, cost, id).
pub fn random_instance(seed: u64) -> MatchInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=200usize);
    let m = rng.gen_range(1..=16usize);
    let t_ad = Distance::from_halves(6);

    let patients: Vec<EligiblePatient> = (0..n)
        .map(|i| EligiblePatient {
            id: PatientId(i as u64 + 1),
            risk: RiskScore::from_hundredths(rng.gen_range(0..=100)).unwrap(),
        })
        .collect();

    let costs: Vec<u64> = (0..m).map(|_| rng.gen_range(1_000..=20_000)).collect();
    let preferences: Vec<Vec<CenterId>> = (0..n)
        .map(|_| {
            let budget: u64 = rng.gen_range(0..=22_000);
            let mut entries = Vec::new();
            for (j, &cost) in costs.iter().enumerate() {
                // Halves 1..=8 with some centers unreachable outright.
                if rng.gen_bool(0.15) {
                    continue;
                }
                let distance = Distance::from_halves(rng.gen_range(1..=8));
                if distance < t_ad && cost <= budget {
                    entries.push(PreferenceEntry {
                        center: CenterId(j as u32 + 1),
                        distance,
                        cost,
                    });
                }
            }
            bucket_sort_by_distance(entries)
                .into_iter()
                .map(|e| e.center)
                .collect()
        })
        .collect();

    let capacities: Vec<(CenterId, u32)> = (0..m)
        .map(|j| (CenterId(j as u32 + 1), rng.gen_range(0..=8)))
        .collect();

    MatchInstance {
        patients,
        preferences,
        capacities,
    }
}

/// Mid-size instance with distinct risks: n <= 50, m <= 8.
pub fn random_mid_instance(seed: u64) -> MatchInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=50usize);
    let m = rng.gen_range(1..=8usize);

    let mut deck: Vec<u8> = (0..=100).collect();
    for i in (1..deck.len()).rev() {
        let j = rng.gen_range(0..=i);
        deck.swap(i, j);
    }
    let patients: Vec<EligiblePatient> = (0..n)
        .map(|i| EligiblePatient {
            id: PatientId(i as u64 + 1),
            risk: RiskScore::from_hundredths(deck[i]).unwrap(),
        })
        .collect();

    let preferences: Vec<Vec<CenterId>> = (0..n)
        .map(|_| {
            let mut list: Vec<CenterId> = (1..=m as u32)
                .filter(|_| rng.gen_bool(0.5))
                .map(CenterId)
                .collect();
            for i in (1..list.len()).rev() {
                let j = rng.gen_range(0..=i);
                list.swap(i, j);
            }
            list
        })
        .collect();

    let capacities: Vec<(CenterId, u32)> = (0..m)
        .map(|j| (CenterId(j as u32 + 1), rng.gen_range(0..=6)))
        .collect();

    MatchInstance {
        patients,
        preferences,
        capacities,
    }
}

/// Tiny instance with distinct risks: n <= 10, m <= 4, total beds <= 5.
pub fn random_tiny_instance(seed: u64) -> MatchInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=10usize);
    let m = rng.gen_range(1..=4usize);

    let mut deck: Vec<u8> = (0..=100).collect();
    for i in (1..deck.len()).rev() {
        let j = rng.gen_range(0..=i);
        deck.swap(i, j);
    }
    let patients: Vec<EligiblePatient> = (0..n)
        .map(|i| EligiblePatient {
            id: PatientId(i as u64 + 1),
            risk: RiskScore::from_hundredths(deck[i]).unwrap(),
        })
        .collect();

    let preferences: Vec<Vec<CenterId>> = (0..n)
        .map(|_| {
            let mut list: Vec<CenterId> = (1..=m as u32)
                .filter(|_| rng.gen_bool(0.65))
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
