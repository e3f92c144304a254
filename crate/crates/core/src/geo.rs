//! State adjacency graph and the hop-based distance model used to decide
//! whether a center is accessible.
//!
//! Distance is 0.5 inside the residency state, 1.0 for a neighbor state, and
//! grows by 1.0 per further hop (BFS shortest path). Disconnected states are
//! reported as unreachable rather than infinitely far, so callers can log why
//! a center was excluded.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::domain::{Distance, StateCode};

/// Undirected state adjacency graph. Edges are stored as normalized
/// unordered pairs; self-loops are rejected at parse time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateAdjacency {
    states: BTreeSet<StateCode>,
    neighbors: BTreeMap<StateCode, BTreeSet<StateCode>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("state {0} is not in the adjacency table")]
    UnknownState(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum AdjacencyParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

impl StateAdjacency {
    /// Parses the edge-list format: one `STATE_A,STATE_B` edge per line,
    /// `#` comments, blank lines ignored. A line holding a single state code
    /// declares an isolated vertex (used for AK and HI in the shipped file).
    /// Duplicate edges in either order collapse silently.
    pub fn parse(text: &str) -> Result<StateAdjacency, AdjacencyParseError> {
        let mut adj = StateAdjacency {
            states: BTreeSet::new(),
            neighbors: BTreeMap::new(),
        };
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.split_once('#') {
                Some((before, _)) => before.trim(),
                None => raw_line.trim(),
            };
            if line.is_empty() {
                continue;
            }
            let parse_state = |tok: &str| {
                StateCode::parse(tok.trim()).ok_or(AdjacencyParseError::Malformed {
                    line: line_no,
                    msg: format!("{:?} is not a two-letter state code", tok.trim()),
                })
            };
            match line.split_once(',') {
                None => {
                    let s = parse_state(line)?;
                    adj.add_state(s);
                }
                Some((a, b)) => {
                    let a = parse_state(a)?;
                    let b = parse_state(b)?;
                    if a == b {
                        return Err(AdjacencyParseError::Malformed {
                            line: line_no,
                            msg: format!("self-loop on {}", a),
                        });
                    }
                    adj.add_edge(a, b);
                }
            }
        }
        Ok(adj)
    }

    pub fn add_state(&mut self, s: StateCode) {
        self.states.insert(s);
        self.neighbors.entry(s).or_default();
    }

    pub fn add_edge(&mut self, a: StateCode, b: StateCode) {
        self.add_state(a);
        self.add_state(b);
        self.neighbors.get_mut(&a).unwrap().insert(b);
        self.neighbors.get_mut(&b).unwrap().insert(a);
    }

    pub fn states(&self) -> &BTreeSet<StateCode> {
        &self.states
    }

    pub fn contains(&self, s: StateCode) -> bool {
        self.states.contains(&s)
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.values().map(|n| n.len()).sum::<usize>() / 2
    }

    /// Hop distance between two states: 0.5 for the same state, otherwise the
    /// BFS shortest-path hop count, or `None` when no path exists.
    pub fn hop_distance(
        &self,
        from: StateCode,
        to: StateCode,
    ) -> Result<Option<Distance>, GeoError> {
        if !self.contains(from) {
            return Err(GeoError::UnknownState(from.to_string()));
        }
        if !self.contains(to) {
            return Err(GeoError::UnknownState(to.to_string()));
        }
        if from == to {
            return Ok(Some(Distance::OWN_STATE));
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(from);
        queue.push_back((from, 0u32));
        while let Some((s, hops)) = queue.pop_front() {
            for &n in &self.neighbors[&s] {
                if n == to {
                    return Ok(Some(Distance::from_hops(hops + 1)));
                }
                if seen.insert(n) {
                    queue.push_back((n, hops + 1));
                }
            }
        }
        Ok(None)
    }
}

/// All-pairs distance table precomputed from an adjacency graph (at most
/// 51x51 entries for the shipped US file). Lookups are infallible for states
/// present at build time.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    index: BTreeMap<StateCode, usize>,
    entries: Vec<Option<Distance>>,
    n: usize,
}

impl DistanceTable {
    pub fn build(adj: &StateAdjacency) -> DistanceTable {
        let index: BTreeMap<StateCode, usize> = adj
            .states()
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, i))
            .collect();
        let n = index.len();
        let mut entries = vec![None; n * n];
        for (&from, &i) in &index {
            for (&to, &j) in &index {
                if j < i {
                    continue;
                }
                let d = adj.hop_distance(from, to).expect("states are in the graph");
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        DistanceTable { index, entries, n }
    }

    pub fn get(&self, from: StateCode, to: StateCode) -> Result<Option<Distance>, GeoError> {
        let i = *self
            .index
            .get(&from)
            .ok_or_else(|| GeoError::UnknownState(from.to_string()))?;
        let j = *self
            .index
            .get(&to)
            .ok_or_else(|| GeoError::UnknownState(to.to_string()))?;
        Ok(self.entries[i * self.n + j])
    }
}

/// A center is accessible iff its distance is strictly below the threshold.
pub fn is_accessible(d: Distance, t_ad: Distance) -> bool {
    d < t_ad
}
