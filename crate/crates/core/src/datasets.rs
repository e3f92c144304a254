//! Shipped reference data: the 64-center dataset and the US state adjacency
//! table, embedded so library users and tests need no external files.
//!
//! The `treatment_cost` column is synthetic (no public per-center figures
//! exist); staffed-bed counts, states, and types follow the published
//! center list. Costs are per-state averages in whole USD, with four
//! premium-priced centers that sit above any default synthetic budget.

use crate::domain::CancerCenter;
use crate::geo::StateAdjacency;
use crate::io::{parse_centers, LoadError};

/// 64 treatment-providing centers; Basic Laboratory sites are pre-excluded.
pub const CENTERS_CSV: &str = include_str!("../data/centers.csv");

/// US adjacency: land borders, plus AK and HI as isolated vertices.
pub const US_STATE_ADJACENCY: &str = include_str!("../data/us_state_adjacency.txt");

pub fn shipped_adjacency() -> StateAdjacency {
    StateAdjacency::parse(US_STATE_ADJACENCY).expect("shipped adjacency file parses")
}

pub fn shipped_centers() -> Result<Vec<CancerCenter>, LoadError> {
    parse_centers(CENTERS_CSV, &shipped_adjacency())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_adjacency_has_51_jurisdictions() {
        let adj = shipped_adjacency();
        assert_eq!(adj.states().len(), 51);
        // AK and HI are isolated.
        let st = |c: &str| crate::domain::StateCode::parse(c).unwrap();
        assert_eq!(adj.hop_distance(st("HI"), st("CA")).unwrap(), None);
        assert_eq!(adj.hop_distance(st("AK"), st("WA")).unwrap(), None);
        // Spot checks against the map.
        let d = |a: &str, b: &str| adj.hop_distance(st(a), st(b)).unwrap().unwrap().as_f64();
        assert_eq!(d("CA", "CA"), 0.5);
        assert_eq!(d("CA", "AZ"), 1.0);
        assert_eq!(d("CA", "WA"), 2.0);
        assert_eq!(d("KY", "DC"), 2.0);
        assert_eq!(d("NJ", "DC"), 3.0);
        assert_eq!(d("CT", "NH"), 2.0);
        assert_eq!(d("NM", "KS"), 2.0);
    }

    #[test]
    fn shipped_centers_load() {
        let centers = shipped_centers().unwrap();
        assert_eq!(centers.len(), 64);
        let beds: u64 = centers
            .iter()
            .map(|c| u64::from(c.staffed_beds_total))
            .sum();
        assert_eq!(beds, 25_387);
    }
}
