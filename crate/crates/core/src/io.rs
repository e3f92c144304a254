//! Batch ingestion, report writing, and scenario execution for the CLI.
//!
//! File formats (all UTF-8, LF, headers exactly as written):
//! - patients:   `id,state,annual_income,risk_score`
//! - centers:    `id,name,city,state,type,staffed_beds,treatment_cost`
//! - assignments.csv: `round,patient_id,center_id,accepted`
//! - rounds.json: array of per-round reports
//! - summary.json: scenario totals

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::domain::{
    CancerCenter, CenterRecord, MatchConfig, Patient, PatientRecord, ValidationError,
};
use crate::geo::{AdjacencyParseError, DistanceTable, StateAdjacency};
use crate::rounds::{run_to_completion, RoundError, RunOptions, ScenarioOutcome};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Validation {
        line: usize,
        source: ValidationError,
    },
    #[error(transparent)]
    Adjacency(#[from] AdjacencyParseError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LoadError + '_ {
    move |source| LoadError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_adjacency(path: &Path) -> Result<StateAdjacency, LoadError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(StateAdjacency::parse(&text)?)
}

/// Parses and validates a patients CSV. Line numbers in errors count the
/// header as line 1.
pub fn parse_patients(text: &str, adj: &StateAdjacency) -> Result<Vec<Patient>, LoadError> {
    let known: BTreeSet<_> = adj.states().iter().copied().collect();
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    expect_headers(&mut reader, &["id", "state", "annual_income", "risk_score"])?;
    let mut seen = BTreeSet::new();
    let mut patients = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| LoadError::Parse {
            line,
            msg: e.to_string(),
        })?;
        let field = |i: usize| row.get(i).unwrap_or("").trim();
        let record = PatientRecord {
            id: parse_num(field(0), "id", line)?,
            state: field(1).to_string(),
            annual_income: parse_num(field(2), "annual_income", line)?,
            risk_score: field(3).to_string(),
        };
        let patient = crate::domain::validate_patient(&record, &known, &mut seen)
            .map_err(|source| LoadError::Validation { line, source })?;
        patients.push(patient);
    }
    Ok(patients)
}

pub fn load_patients(path: &Path, adj: &StateAdjacency) -> Result<Vec<Patient>, LoadError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_patients(&text, adj)
}

/// Parses and validates a centers CSV. Basic Laboratory rows are skipped
/// with a warning rather than failing the load.
pub fn parse_centers(text: &str, adj: &StateAdjacency) -> Result<Vec<CancerCenter>, LoadError> {
    let known: BTreeSet<_> = adj.states().iter().copied().collect();
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    expect_headers(
        &mut reader,
        &[
            "id",
            "name",
            "city",
            "state",
            "type",
            "staffed_beds",
            "treatment_cost",
        ],
    )?;
    let mut seen = BTreeSet::new();
    let mut centers = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| LoadError::Parse {
            line,
            msg: e.to_string(),
        })?;
        let field = |i: usize| row.get(i).unwrap_or("").trim();
        let record = CenterRecord {
            id: parse_num(field(0), "id", line)?,
            name: field(1).to_string(),
            city: field(2).to_string(),
            state: field(3).to_string(),
            center_type: field(4).to_string(),
            staffed_beds: parse_num(field(5), "staffed_beds", line)?,
            treatment_cost: parse_num(field(6), "treatment_cost", line)?,
        };
        match crate::domain::validate_center(&record, &known, &mut seen) {
            Ok(center) => centers.push(center),
            Err(ValidationError::BasicLaboratoryExcluded { id }) => {
                log::warn!(
                    "line {}: center {} is a Basic Laboratory, skipped",
                    line,
                    id
                );
            }
            Err(source) => return Err(LoadError::Validation { line, source }),
        }
    }
    Ok(centers)
}

pub fn load_centers(path: &Path, adj: &StateAdjacency) -> Result<Vec<CancerCenter>, LoadError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_centers(&text, adj)
}

/// Writes centers in the load format; `load_centers(write_centers(x)) = x`.
pub fn write_centers_string(centers: &[CancerCenter]) -> String {
    let mut out = String::from("id,name,city,state,type,staffed_beds,treatment_cost\n");
    for c in centers {
        let needs_quotes = c.name.contains(',') || c.name.contains('"');
        let name = if needs_quotes {
            format!("\"{}\"", c.name.replace('"', "\"\""))
        } else {
            c.name.clone()
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.id, name, c.city, c.state, c.center_type, c.staffed_beds_total, c.treatment_cost
        ));
    }
    out
}

pub fn write_centers(path: &Path, centers: &[CancerCenter]) -> Result<(), LoadError> {
    fs::write(path, write_centers_string(centers)).map_err(io_err(path))
}

/// Writes patients in the load format.
pub fn write_patients_string(patients: &[Patient]) -> String {
    let mut out = String::from("id,state,annual_income,risk_score\n");
    for p in patients {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.id, p.state, p.annual_income, p.risk_score
        ));
    }
    out
}

pub fn write_patients(path: &Path, patients: &[Patient]) -> Result<(), LoadError> {
    fs::write(path, write_patients_string(patients)).map_err(io_err(path))
}

fn parse_num<T: std::str::FromStr>(s: &str, name: &str, line: usize) -> Result<T, LoadError> {
    s.parse().map_err(|_| LoadError::Parse {
        line,
        msg: format!("{} {:?} is not a valid number", name, s),
    })
}

fn expect_headers<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
    expected: &[&str],
) -> Result<(), LoadError> {
    let headers = reader.headers().map_err(|e| LoadError::Parse {
        line: 1,
        msg: e.to_string(),
    })?;
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(LoadError::Parse {
            line: 1,
            msg: format!(
                "expected header {:?}, got {:?}",
                expected.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

/// Paths plus matching parameters for one batch run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub patients: PathBuf,
    pub centers: PathBuf,
    pub adjacency: PathBuf,
    pub config: MatchConfig,
    pub out_dir: PathBuf,
    pub verify: bool,
    pub trace: bool,
}

/// Scenario totals written to summary.json.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioSummary {
    pub rounds: u32,
    pub beds_available: u64,
    pub beds_filled: u64,
    pub beds_unfilled: u64,
    pub patients_eligible: u64,
    pub patients_matched: u64,
    pub patients_unmatched: u64,
    pub offers_made: u64,
    pub offers_declined: u64,
    pub proposals_total: u64,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("loading {what}: {source}")]
    Load {
        what: &'static str,
        source: LoadError,
    },
    #[error(transparent)]
    Round(#[from] RoundError),
    #[error("writing {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Config(#[from] ValidationError),
}

impl ScenarioError {
    /// Process exit code: 2 for input/validation problems, 3 when the first
    /// round has no eligible patients, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Load { .. } | ScenarioError::Config(_) => 2,
            ScenarioError::Round(RoundError::NoEligiblePatients) => 3,
            ScenarioError::Round(RoundError::Config(_)) => 2,
            ScenarioError::Round(RoundError::ScriptIo { .. }) => 2,
            ScenarioError::Round(RoundError::BadScript { .. }) => 2,
            _ => 1,
        }
    }
}

/// Loads everything, runs the rounds to completion, and writes
/// assignments.csv, rounds.json, and summary.json (plus per-round
/// trace_round_N.csv when tracing) into the output directory.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioSummary, ScenarioError> {
    let load = |what, source| ScenarioError::Load { what, source };
    let adj = load_adjacency(&cfg.adjacency).map_err(|e| load("adjacency", e))?;
    let centers = load_centers(&cfg.centers, &adj).map_err(|e| load("centers", e))?;
    let patients = load_patients(&cfg.patients, &adj).map_err(|e| load("patients", e))?;
    cfg.config.validate()?;

    let distances = DistanceTable::build(&adj);
    let opts = RunOptions {
        verify: cfg.verify,
        trace: cfg.trace,
    };
    let outcome = run_to_completion(patients, centers, distances, cfg.config.clone(), opts)?;

    write_reports(&cfg.out_dir, &outcome)?;
    Ok(summarize(&outcome))
}

pub fn summarize(outcome: &ScenarioOutcome) -> ScenarioSummary {
    let offers_made = outcome.offers.len() as u64;
    let matched = outcome.beds_filled();
    ScenarioSummary {
        rounds: outcome.reports.len() as u32,
        beds_available: outcome.beds_available(),
        beds_filled: matched,
        beds_unfilled: outcome.beds_unfilled(),
        patients_eligible: outcome.eligible_total,
        patients_matched: matched,
        patients_unmatched: outcome.eligible_total - matched,
        offers_made,
        offers_declined: offers_made - matched,
        proposals_total: outcome.proposals_total,
    }
}

/// Writes the three report files (and traces) with LF endings.
pub fn write_reports(out_dir: &Path, outcome: &ScenarioOutcome) -> Result<(), ScenarioError> {
    let write_err = |path: &Path| {
        let path = path.display().to_string();
        move |source: std::io::Error| ScenarioError::Write { path, source }
    };
    fs::create_dir_all(out_dir).map_err(write_err(out_dir))?;

    let assignments = out_dir.join("assignments.csv");
    let mut buf = String::from("round,patient_id,center_id,accepted\n");
    for (round, offer) in &outcome.offers {
        buf.push_str(&format!(
            "{},{},{},{}\n",
            round, offer.patient, offer.center, offer.accepted
        ));
    }
    fs::write(&assignments, buf).map_err(write_err(&assignments))?;

    let rounds = out_dir.join("rounds.json");
    let json = serde_json::to_vec_pretty(&outcome.reports).expect("reports serialize");
    let mut file = fs::File::create(&rounds).map_err(write_err(&rounds))?;
    file.write_all(&json).map_err(write_err(&rounds))?;
    file.write_all(b"\n").map_err(write_err(&rounds))?;

    let summary_path = out_dir.join("summary.json");
    let json = serde_json::to_vec_pretty(&summarize(outcome)).expect("summary serializes");
    let mut file = fs::File::create(&summary_path).map_err(write_err(&summary_path))?;
    file.write_all(&json).map_err(write_err(&summary_path))?;
    file.write_all(b"\n").map_err(write_err(&summary_path))?;

    for (i, trace) in outcome.traces.iter().enumerate() {
        let path = out_dir.join(format!("trace_round_{}.csv", i + 1));
        let mut buf = String::from("step_no,patient_id,center_id,action\n");
        for event in trace {
            buf.push_str(&event.to_csv_line());
            buf.push('\n');
        }
        fs::write(&path, buf).map_err(write_err(&path))?;
    }
    Ok(())
}
