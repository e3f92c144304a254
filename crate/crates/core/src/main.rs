//! Batch CLI: run a matching scenario from CSV inputs, or synthesize a
//! cohort to feed one.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use carematch::domain::{
    AvailabilityFraction, Distance, MatchConfig, PolicySpec, RiskScore, ValidationError,
};
use carematch::io::{run_scenario, write_patients, ScenarioConfig};
use carematch::riskrank::{synthesize_cohort, CohortSpec};

#[derive(Parser)]
#[command(
    name = "carematch",
    version,
    about = "Assign high-risk patients to staffed beds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a matching scenario and write reports to the output directory.
    Run(RunArgs),
    /// Write a deterministic synthetic cohort CSV.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Patients CSV: id,state,annual_income,risk_score
    #[arg(long)]
    patients: PathBuf,
    /// Centers CSV: id,name,city,state,type,staffed_beds,treatment_cost
    #[arg(long)]
    centers: PathBuf,
    /// State adjacency file: STATE_A,STATE_B per line
    #[arg(long)]
    adjacency: PathBuf,
    /// Percent of annual income available for treatment, in (0, 100]
    #[arg(long)]
    x_percent: u32,
    /// Accessible-distance cutoff (strict), e.g. 3 or 2.5
    #[arg(long)]
    t_ad: String,
    /// Risk threshold (inclusive), e.g. 0.50
    #[arg(long)]
    t_rs: String,
    /// Fraction of staffed beds open for assignment, in (0, 1]
    #[arg(long)]
    availability: String,
    /// always | bernoulli:P | script:PATH
    #[arg(long, default_value = "always")]
    policy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_rounds: u32,
    /// Output directory for assignments.csv, rounds.json, summary.json
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Audit every round for blocking pairs and fail on any violation
    #[arg(long)]
    verify: bool,
    /// Write per-round engine traces (trace_round_N.csv)
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Cohort size
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Lowest risk score to draw (inclusive)
    #[arg(long, default_value = "0.50")]
    risk_lo: String,
    /// Highest risk score to draw (inclusive)
    #[arg(long, default_value = "1.00")]
    risk_hi: String,
}

fn parse_policy(s: &str) -> Result<PolicySpec, String> {
    if s == "always" {
        return Ok(PolicySpec::AlwaysAccept);
    }
    if let Some(p) = s.strip_prefix("bernoulli:") {
        let prob: f64 = p.parse().map_err(|_| format!("bad probability {:?}", p))?;
        return Ok(PolicySpec::Bernoulli { prob });
    }
    if let Some(path) = s.strip_prefix("script:") {
        return Ok(PolicySpec::Scripted {
            path: PathBuf::from(path),
        });
    }
    Err(format!(
        "unknown policy {:?}; expected always, bernoulli:P, or script:PATH",
        s
    ))
}

fn run(args: RunArgs) -> Result<(), (i32, String)> {
    let invalid = |e: ValidationError| (2, e.to_string());
    let config = MatchConfig {
        x_percent: args.x_percent,
        t_ad: Distance::parse_decimal(&args.t_ad).map_err(invalid)?,
        t_rs: RiskScore::parse_decimal(&args.t_rs).map_err(invalid)?,
        availability: AvailabilityFraction::parse_decimal(&args.availability).map_err(invalid)?,
        policy: parse_policy(&args.policy).map_err(|m| (2, m))?,
        rng_seed: args.seed,
        max_rounds: args.max_rounds,
    };
    config.validate().map_err(invalid)?;

    let scenario = ScenarioConfig {
        patients: args.patients,
        centers: args.centers,
        adjacency: args.adjacency,
        config,
        out_dir: args.out.clone(),
        verify: args.verify,
        trace: args.trace,
    };
    let summary = run_scenario(&scenario).map_err(|e| (e.exit_code(), e.to_string()))?;
    println!(
        "rounds: {}  beds: {}/{} filled  unmatched: {}  reports: {}",
        summary.rounds,
        summary.beds_filled,
        summary.beds_available,
        summary.patients_unmatched,
        args.out.display()
    );
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), (i32, String)> {
    let invalid = |e: ValidationError| (2, e.to_string());
    let spec = CohortSpec {
        risk_lo: RiskScore::parse_decimal(&args.risk_lo).map_err(invalid)?,
        risk_hi: RiskScore::parse_decimal(&args.risk_hi).map_err(invalid)?,
        ..CohortSpec::default()
    };
    let cohort = synthesize_cohort(args.n, args.seed, &spec).map_err(|e| (2, e.to_string()))?;
    write_patients(&args.out, &cohort).map_err(|e| (2, e.to_string()))?;
    println!("wrote {} patients to {}", cohort.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Synth(args) => synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(code as u8)
        }
    }
}
