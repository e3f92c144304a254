//! Exercises the installed binary end to end: flags, exit codes, and the
//! report files it writes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use carematch::datasets;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_carematch"))
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    centers: PathBuf,
    adjacency: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let centers = root.join("centers.csv");
    std::fs::write(&centers, datasets::CENTERS_CSV).unwrap();
    let adjacency = root.join("adjacency.txt");
    std::fs::write(&adjacency, datasets::US_STATE_ADJACENCY).unwrap();
    Fixture {
        _dir: dir,
        root,
        centers,
        adjacency,
    }
}

fn synth(fx: &Fixture, n: u32, seed: u64) -> PathBuf {
    let path = fx.root.join(format!("patients_{}_{}.csv", n, seed));
    let out = bin()
        .args(["synth", "--n", &n.to_string(), "--seed", &seed.to_string()])
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "synth failed: {}", stderr(&out));
    path
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn run_args(fx: &Fixture, patients: &Path, out_dir: &Path) -> Vec<String> {
    [
        "run",
        "--patients",
        patients.to_str().unwrap(),
        "--centers",
        fx.centers.to_str().unwrap(),
        "--adjacency",
        fx.adjacency.to_str().unwrap(),
        "--x-percent",
        "25",
        "--t-ad",
        "3",
        "--t-rs",
        "0.50",
        "--availability",
        "0.20",
        "--out",
        out_dir.to_str().unwrap(),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

#[test]
fn full_run_writes_reports() {
    let fx = fixture();
    let patients = synth(&fx, 400, 42);
    let out_dir = fx.root.join("out");
    let out = bin()
        .args(run_args(&fx, &patients, &out_dir))
        .args(["--verify", "--trace", "--seed", "9"])
        .output()
        .unwrap();
    assert!(out.status.success(), "run failed: {}", stderr(&out));

    let assignments = std::fs::read_to_string(out_dir.join("assignments.csv")).unwrap();
    let mut lines = assignments.lines();
    assert_eq!(lines.next(), Some("round,patient_id,center_id,accepted"));
    let first = lines.next().expect("at least one offer");
    let fields: Vec<&str> = first.split(',').collect();
    assert_eq!(fields.len(), 4);
    assert_eq!(fields[0], "1");
    assert_eq!(fields[3], "true");

    let rounds: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("rounds.json")).unwrap())
            .unwrap();
    assert!(rounds.as_array().is_some_and(|a| !a.is_empty()));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["beds_available"], 5055);
    assert_eq!(summary["patients_eligible"], 400);

    let trace = std::fs::read_to_string(out_dir.join("trace_round_1.csv")).unwrap();
    assert!(trace.starts_with("step_no,patient_id,center_id,action\n"));
    assert!(trace.lines().nth(1).unwrap().ends_with("SEATED"));
}

#[test]
fn assignment_rows_reference_known_ids_and_accepts_are_unique() {
    let fx = fixture();
    let patients = synth(&fx, 300, 3);
    let out_dir = fx.root.join("out_ids");
    let out = bin()
        .args(run_args(&fx, &patients, &out_dir))
        .args(["--policy", "bernoulli:0.6", "--seed", "4"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let patient_ids: std::collections::BTreeSet<u64> = (1..=300).collect();
    let center_ids: std::collections::BTreeSet<u64> = (1..=64).collect();
    let mut accepted = std::collections::BTreeSet::new();
    let text = std::fs::read_to_string(out_dir.join("assignments.csv")).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let pid: u64 = f[1].parse().unwrap();
        let cid: u64 = f[2].parse().unwrap();
        assert!(patient_ids.contains(&pid));
        assert!(center_ids.contains(&cid));
        if f[3] == "true" {
            assert!(accepted.insert(pid), "patient {} accepted twice", pid);
        }
    }
}

#[test]
fn missing_required_flag_exits_2() {
    let fx = fixture();
    let patients = synth(&fx, 10, 1);
    let out = bin()
        .args([
            "run",
            "--patients",
            patients.to_str().unwrap(),
            "--centers",
            fx.centers.to_str().unwrap(),
            "--adjacency",
            fx.adjacency.to_str().unwrap(),
            "--x-percent",
            "25",
            "--t-ad",
            "3",
            "--availability",
            "0.20",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--t-rs"));
}

#[test]
fn validation_failure_exits_2() {
    let fx = fixture();
    let bad = fx.root.join("bad_patients.csv");
    std::fs::write(&bad, "id,state,annual_income,risk_score\n1,CA,-5,0.75\n").unwrap();
    let out_dir = fx.root.join("out_bad");
    let out = bin().args(run_args(&fx, &bad, &out_dir)).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("negative"));
}

#[test]
fn empty_first_round_exits_3() {
    let fx = fixture();
    let low = fx.root.join("low_risk.csv");
    std::fs::write(&low, "id,state,annual_income,risk_score\n1,CA,40000,0.30\n").unwrap();
    let out_dir = fx.root.join("out_empty");
    let out = bin().args(run_args(&fx, &low, &out_dir)).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("no eligible patients"));
}

#[test]
fn scripted_policy_round_trips() {
    let fx = fixture();
    let patients = synth(&fx, 50, 5);
    let script = fx.root.join("script.csv");
    std::fs::write(&script, "1,1,DECLINE\n2,1,DECLINE\n").unwrap();
    let out_dir = fx.root.join("out_script");
    let out = bin()
        .args(run_args(&fx, &patients, &out_dir))
        .arg("--policy")
        .arg(format!("script:{}", script.display()))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(out_dir.join("assignments.csv")).unwrap();
    // Patients 1 and 2 decline in round 1 but land eventually (default ACCEPT
    // from round 2 on).
    let declined: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("1,1,") || l.starts_with("1,2,"))
        .collect();
    assert!(declined.iter().all(|l| l.ends_with("false")));
    assert!(text
        .lines()
        .any(|l| l.starts_with("2,1,") && l.ends_with("true")));

    let bad_script = fx.root.join("bad.csv");
    std::fs::write(&bad_script, "1,1,MAYBE\n").unwrap();
    let out = bin()
        .args(run_args(&fx, &patients, &fx.root.join("out_script2")))
        .arg("--policy")
        .arg(format!("script:{}", bad_script.display()))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_policy_exits_2() {
    let fx = fixture();
    let patients = synth(&fx, 10, 1);
    let out = bin()
        .args(run_args(&fx, &patients, &fx.root.join("outx")))
        .args(["--policy", "sometimes"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown policy"));
}

#[test]
fn synth_is_deterministic_across_invocations() {
    let fx = fixture();
    let a = synth(&fx, 120, 77);
    let b_path = fx.root.join("again.csv");
    let out = bin()
        .args(["synth", "--n", "120", "--seed", "77"])
        .arg("--out")
        .arg(&b_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b_path).unwrap());
}
