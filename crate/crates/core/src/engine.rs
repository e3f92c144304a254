//! One complete deferred-acceptance pass with displacement over a master
//! priority list, producing the (matches, waiting, unassigned) triplet.
//!
//! All centers rank patients by the same key: higher risk first, ties broken
//! by ascending patient id. Patients are processed FIFO in that order, so a
//! run is deterministic and, with distinct risk scores, equivalent to a
//! truncated serial dictatorship (checked by [`check_equals_serial_dictatorship`]).

use std::cmp::Reverse;
use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::domain::{CenterId, PatientId, RiskScore};

/// Patient view the engine needs: identity plus priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EligiblePatient {
    pub id: PatientId,
    pub risk: RiskScore,
}

impl EligiblePatient {
    /// Master priority key: ascending order = higher risk first, then lower id.
    pub fn priority(&self) -> (Reverse<RiskScore>, PatientId) {
        (Reverse(self.risk), self.id)
    }
}

/// One matching problem: eligible patients, their ordered center lists, and
/// per-center bed counts for this run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchInstance {
    pub patients: Vec<EligiblePatient>,
    /// Parallel to `patients`: each patient's ordered center list.
    pub preferences: Vec<Vec<CenterId>>,
    pub capacities: Vec<(CenterId, u32)>,
}

impl MatchInstance {
    pub fn total_beds(&self) -> u64 {
        self.capacities.iter().map(|&(_, c)| u64::from(c)).sum()
    }
}

/// Output triplet plus the proposal count for the complexity bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    /// Seated (patient, center) pairs, sorted by patient id.
    pub matches: Vec<(PatientId, CenterId)>,
    /// Patients never processed, in waitlist order.
    pub waiting: Vec<PatientId>,
    /// Patients whose center list emptied, in unassignment order.
    pub unassigned: Vec<PatientId>,
    pub proposal_count: u64,
}

/// Status of a patient inside a run: W, P0, P1, O.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatientStatus {
    /// In the waitlist, not yet processed.
    Waiting,
    /// In the process list, currently unassigned.
    Processing,
    /// In the process list, tentatively seated.
    Assigned,
    /// Out: center list exhausted.
    Unassigned,
}

/// What a single transition did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEffect {
    /// Proposer seated at a center with a free bed.
    Seated {
        patient: PatientId,
        center: CenterId,
    },
    /// Proposer rejected; the center left its list.
    Rejected {
        patient: PatientId,
        center: CenterId,
    },
    /// Proposer seated by evicting the lowest-priority occupant.
    Displaced {
        patient: PatientId,
        center: CenterId,
        evicted: PatientId,
    },
    /// Proposer's list was empty; moved out, possibly promoting a waiter.
    Unassigned {
        patient: PatientId,
        promoted: Option<PatientId>,
    },
    /// No patient with status P0 remains.
    Terminated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceAction {
    Seated,
    Rejected,
    Displaced,
    Unassigned,
    Promoted,
}

impl fmt::Display for TraceAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceAction::Seated => "SEATED",
            TraceAction::Rejected => "REJECTED",
            TraceAction::Displaced => "DISPLACED",
            TraceAction::Unassigned => "UNASSIGNED",
            TraceAction::Promoted => "PROMOTED",
        })
    }
}

/// One trace line; a displacement step emits two (DISPLACED then SEATED)
/// sharing a step number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub step_no: u64,
    pub patient: PatientId,
    pub center: Option<CenterId>,
    pub action: TraceAction,
}

impl TraceEvent {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.step_no,
            self.patient,
            self.center.map(|c| c.to_string()).unwrap_or_default(),
            self.action
        )
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("engine invariant violated: {0}")]
    InvariantViolation(String),
}

/// Live state of one deferred-acceptance run.
#[derive(Debug, Clone)]
pub struct EngineState {
    patients: Vec<EligiblePatient>,
    // Remaining ordered center sublist per patient, as an index cursor into
    // `prefs`: entries only leave from the front.
    prefs: Vec<Vec<usize>>,
    cursor: Vec<usize>,
    status: Vec<PatientStatus>,
    center_ids: Vec<CenterId>,
    capacity: Vec<u32>,
    staffed_bed: Vec<u32>,
    /// Per-center occupants sorted by priority, best first.
    patient_list: Vec<Vec<usize>>,
    wait_list: VecDeque<usize>,
    process_queue: VecDeque<usize>,
    current: Option<usize>,
    unassigned: Vec<usize>,
    proposal_count: u64,
    step_no: u64,
    trace: Option<Vec<TraceEvent>>,
    initial_process_len: usize,
}

impl EngineState {
    /// Builds the run state: the waitlist holds every eligible patient in
    /// master priority order, then the top `min(|waitlist|, total beds)`
    /// move to the process list with status P0.
    pub fn initialize(instance: &MatchInstance) -> EngineState {
        assert_eq!(
            instance.patients.len(),
            instance.preferences.len(),
            "one preference list per patient"
        );
        let mut order: Vec<usize> = (0..instance.patients.len()).collect();
        order.sort_by_key(|&i| instance.patients[i].priority());

        let center_index: BTreeMap<CenterId, usize> = instance
            .capacities
            .iter()
            .enumerate()
            .map(|(j, &(id, _))| (id, j))
            .collect();

        let patients: Vec<EligiblePatient> = order.iter().map(|&i| instance.patients[i]).collect();
        let prefs: Vec<Vec<usize>> = order
            .iter()
            .map(|&i| {
                instance.preferences[i]
                    .iter()
                    .map(|cid| {
                        *center_index
                            .get(cid)
                            .expect("preference lists reference known centers")
                    })
                    .collect()
            })
            .collect();

        let n = patients.len();
        let capacity: Vec<u32> = instance.capacities.iter().map(|&(_, c)| c).collect();
        let total_beds: u64 = capacity.iter().map(|&c| u64::from(c)).sum();
        let process_len = (n as u64).min(total_beds) as usize;

        let mut state = EngineState {
            patients,
            prefs,
            cursor: vec![0; n],
            status: vec![PatientStatus::Waiting; n],
            center_ids: instance.capacities.iter().map(|&(id, _)| id).collect(),
            capacity: capacity.clone(),
            staffed_bed: capacity,
            patient_list: vec![Vec::new(); instance.capacities.len()],
            wait_list: (process_len..n).collect(),
            process_queue: (0..process_len).collect(),
            current: None,
            unassigned: Vec::new(),
            proposal_count: 0,
            step_no: 0,
            trace: None,
            initial_process_len: process_len,
        };
        for i in 0..process_len {
            state.status[i] = PatientStatus::Processing;
        }
        state
    }

    /// Record per-step trace events for golden-file tests.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn trace(&self) -> &[TraceEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn proposal_count(&self) -> u64 {
        self.proposal_count
    }

    pub fn initial_process_len(&self) -> usize {
        self.initial_process_len
    }

    pub fn status_of(&self, id: PatientId) -> Option<PatientStatus> {
        self.patients
            .iter()
            .position(|p| p.id == id)
            .map(|i| self.status[i])
    }

    fn emit(&mut self, patient: usize, center: Option<usize>, action: TraceAction) {
        let step_no = self.step_no;
        let patient = self.patients[patient].id;
        let center = center.map(|c| self.center_ids[c]);
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEvent {
                step_no,
                patient,
                center,
                action,
            });
        }
    }

    fn check(&self, ok: bool, msg: &str) -> Result<(), EngineError> {
        if ok {
            Ok(())
        } else {
            Err(EngineError::InvariantViolation(msg.to_string()))
        }
    }

    /// Applies exactly one transition; returns what it did, or `Terminated`
    /// once no P0 patient remains. A proposer keeps proposing across calls
    /// until it is seated or its list empties; a displaced patient resumes
    /// next.
    pub fn step(&mut self) -> Result<StepEffect, EngineError> {
        let p = match self.current {
            Some(p) => p,
            None => match self.process_queue.pop_front() {
                Some(p) => p,
                None => return Ok(StepEffect::Terminated),
            },
        };
        self.check(
            self.status[p] == PatientStatus::Processing,
            "process-list patient is not P0",
        )?;
        self.current = Some(p);
        self.step_no += 1;

        if self.cursor[p] >= self.prefs[p].len() {
            // Center list exhausted: out, and promote the top waiter if any.
            self.status[p] = PatientStatus::Unassigned;
            self.unassigned.push(p);
            self.current = None;
            self.emit(p, None, TraceAction::Unassigned);
            let promoted = self.wait_list.pop_front();
            if let Some(w) = promoted {
                self.check(
                    self.status[w] == PatientStatus::Waiting,
                    "waitlist patient is not W",
                )?;
                self.status[w] = PatientStatus::Processing;
                self.process_queue.push_back(w);
                self.emit(w, None, TraceAction::Promoted);
            }
            return Ok(StepEffect::Unassigned {
                patient: self.patients[p].id,
                promoted: promoted.map(|w| self.patients[w].id),
            });
        }

        let c = self.prefs[p][self.cursor[p]];
        self.proposal_count += 1;
        self.check(
            self.staffed_bed[c] + self.patient_list[c].len() as u32 == self.capacity[c],
            "staffed_bed does not match capacity minus occupants",
        )?;

        if self.staffed_bed[c] > 0 {
            self.seat(p, c);
            self.emit(p, Some(c), TraceAction::Seated);
            return Ok(StepEffect::Seated {
                patient: self.patients[p].id,
                center: self.center_ids[c],
            });
        }

        let beaten = self.patient_list[c]
            .last()
            .copied()
            .map(|last| self.patients[p].priority() < self.patients[last].priority());
        match beaten {
            // Zero-capacity center, or proposer does not beat the last
            // occupant: the center leaves the proposer's list.
            None | Some(false) => {
                self.cursor[p] += 1;
                self.emit(p, Some(c), TraceAction::Rejected);
                Ok(StepEffect::Rejected {
                    patient: self.patients[p].id,
                    center: self.center_ids[c],
                })
            }
            Some(true) => {
                let evicted = self.patient_list[c].pop().expect("occupant checked above");
                self.status[evicted] = PatientStatus::Processing;
                self.process_queue.push_front(evicted);
                self.staffed_bed[c] += 1;
                self.seat(p, c);
                self.emit(evicted, Some(c), TraceAction::Displaced);
                self.emit(p, Some(c), TraceAction::Seated);
                Ok(StepEffect::Displaced {
                    patient: self.patients[p].id,
                    center: self.center_ids[c],
                    evicted: self.patients[evicted].id,
                })
            }
        }
    }

    /// Inserts `p` into the center's occupant list at its priority position
    /// and consumes a bed.
    fn seat(&mut self, p: usize, c: usize) {
        let key = self.patients[p].priority();
        let list = &mut self.patient_list[c];
        let pos = list
            .binary_search_by_key(&key, |&q| self.patients[q].priority())
            .unwrap_or_else(|pos| pos);
        list.insert(pos, p);
        self.staffed_bed[c] -= 1;
        self.status[p] = PatientStatus::Assigned;
        self.current = None;
    }

    /// Runs transitions until no P0 patient remains, then collects the
    /// triplet. Termination is guaranteed: every rejection permanently
    /// consumes a list entry, and a displacement strictly improves the
    /// center's occupant set in the master order.
    pub fn run_inner(&mut self) -> MatchOutcome {
        loop {
            match self
                .step()
                .expect("engine invariants hold for initialized states")
            {
                StepEffect::Terminated => break,
                _ => continue,
            }
        }
        self.outcome()
    }

    /// Collects the current (matches, waiting, unassigned) triplet.
    pub fn outcome(&self) -> MatchOutcome {
        let mut matches: Vec<(PatientId, CenterId)> = Vec::new();
        for (c, occupants) in self.patient_list.iter().enumerate() {
            for &p in occupants {
                matches.push((self.patients[p].id, self.center_ids[c]));
            }
        }
        matches.sort_by_key(|&(p, _)| p);
        MatchOutcome {
            matches,
            waiting: self
                .wait_list
                .iter()
                .map(|&i| self.patients[i].id)
                .collect(),
            unassigned: self
                .unassigned
                .iter()
                .map(|&i| self.patients[i].id)
                .collect(),
            proposal_count: self.proposal_count,
        }
    }

    #[cfg(test)]
    fn force_seat(&mut self, id: PatientId, center: CenterId) {
        let p = self.patients.iter().position(|q| q.id == id).unwrap();
        let c = self.center_ids.iter().position(|&q| q == center).unwrap();
        assert!(self.staffed_bed[c] > 0);
        self.process_queue.retain(|&q| q != p);
        self.wait_list.retain(|&q| q != p);
        self.seat(p, c);
    }
}

/// Independent oracle exploiting the master priority list: process patients
/// in priority order, greedily seating each at its first listed center with
/// a free bed, stopping once the seated count reaches the engine's initial
/// process-list size. Returns true iff the outcome's matches agree.
pub fn check_equals_serial_dictatorship(outcome: &MatchOutcome, instance: &MatchInstance) -> bool {
    let mut order: Vec<usize> = (0..instance.patients.len()).collect();
    order.sort_by_key(|&i| instance.patients[i].priority());

    let mut beds: BTreeMap<CenterId, u32> = instance.capacities.iter().copied().collect();
    let limit = (instance.patients.len() as u64).min(instance.total_beds());

    let mut expected: Vec<(PatientId, CenterId)> = Vec::new();
    for &i in &order {
        if expected.len() as u64 == limit {
            break;
        }
        let choice = instance.preferences[i]
            .iter()
            .find(|cid| beds.get(cid).is_some_and(|&b| b > 0));
        if let Some(&cid) = choice {
            *beds.get_mut(&cid).unwrap() -= 1;
            expected.push((instance.patients[i].id, cid));
        }
    }
    expected.sort_by_key(|&(p, _)| p);
    expected == outcome.matches
}
