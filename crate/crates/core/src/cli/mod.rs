//! Batch commands over JSON portfolio files.
//!
//! Exit codes: 0 success, 1 an axiom or representation check failed,
//! 2 the input or the flags could not be parsed, 3 evaluation error,
//! 4 nothing failed but some verdicts are inconclusive.

mod file;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::aggregators::GeneralizedRiskMeasure;
use crate::axioms::{audit_measure, search_witness, AuditReport, AxiomId, InstanceFamily, SearchError, Witness};
use crate::cores::Core;
use crate::theorems::{recover_distortion, verify_choquet_rep, ChoquetRepReport, RecoveredDistortion, TheoremError};

pub use file::{InputError, MassValue, MeasureEntry, Portfolio, PortfolioFile, PositionEntry, ScenarioEntry, FORMAT_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_EVAL: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "genrisk", version, about = "Evaluate and audit generalized risk measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every position under every scenario and the aggregate.
    Evaluate(IoArgs),
    /// Audit axioms of the configured measure.
    Audit(AuditArgs),
    /// Recover the distortion of the core under one scenario and check it.
    Recover(RecoverArgs),
    /// Search for a minimal violation of one or more axioms.
    Witness(WitnessArgs),
}

#[derive(Debug, Args)]
pub struct IoArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Report path; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Comma-separated axiom ids, e.g. A1,A2,C4.
    #[arg(long, value_delimiter = ',', required = true)]
    pub axioms: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long)]
    pub scenario: String,
    /// Grid resolution k; h is read at t = j/k.
    #[arg(long)]
    pub grid: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub axioms: Vec<String>,
    /// Number of instance checks allowed per axiom.
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioValue {
    pub scenario: String,
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionReport {
    pub id: String,
    pub per_scenario: Vec<ScenarioValue>,
    pub aggregate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub scenario: String,
    pub distortion: RecoveredDistortion,
    pub representation: ChoquetRepReport,
    pub verdict: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub axiom: AxiomId,
    pub status: &'static str,
    pub budget: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Output document of every command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportFile {
    pub format: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub measure: GeneralizedRiskMeasure,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub positions: Vec<PositionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery: Option<RecoveryReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<WitnessReport>,
}

impl ReportFile {
    fn new(command: &'static str, measure: &GeneralizedRiskMeasure, seed: Option<u64>) -> Self {
        Self {
            format: FORMAT_VERSION,
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            measure: measure.clone(),
            positions: Vec::new(),
            audit: None,
            recovery: None,
            witnesses: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Evaluate(a) => cmd_evaluate(&a.input, a.output.as_deref()),
        Command::Audit(a) => cmd_audit(&a),
        Command::Recover(a) => cmd_recover(&a),
        Command::Witness(a) => cmd_witness(&a),
    }
}

fn load(path: &Path) -> Result<Portfolio, i32> {
    PortfolioFile::read(path)
        .and_then(|f| f.validate())
        .map_err(|e| {
            eprintln!("error: {e}");
            EXIT_PARSE
        })
}

fn emit(report: &ReportFile, output: Option<&Path>) -> Result<(), i32> {
    let text = report.to_json();
    let written = match output {
        Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| (path.display().to_string(), e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| ("<stdout>".to_string(), e)),
    };
    written.map_err(|(p, e)| {
        eprintln!("error: cannot write {p}: {e}");
        EXIT_EVAL
    })
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Evaluates every position; exit 3 if any aggregate fails.
pub fn cmd_evaluate(input: &Path, output: Option<&Path>) -> i32 {
    let pf = match load(input) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let mut report = ReportFile::new("evaluate", &pf.measure, None);
    let mut failed = false;
    for (id, x) in &pf.positions {
        let per_scenario = pf
            .scenarios
            .iter()
            .map(|p| {
                let scenario = p.id().unwrap_or_default().to_string();
                match pf.measure.core.eval(x, p) {
                    Ok(v) => ScenarioValue {
                        scenario,
                        value: finite(v),
                        error: (!v.is_finite()).then(|| format!("non-finite value {v}")),
                    },
                    Err(e) => ScenarioValue {
                        scenario,
                        value: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        let (aggregate, error) = match pf.measure.evaluate(x, &pf.scenarios) {
            Ok(v) if v.is_finite() => (Some(v), None),
            Ok(v) => (None, Some(format!("non-finite aggregate {v}"))),
            Err(e) => (None, Some(e.to_string())),
        };
        if let Some(e) = &error {
            eprintln!("error: position `{id}`: {e}");
            failed = true;
        }
        report.positions.push(PositionReport {
            id: id.clone(),
            per_scenario,
            aggregate,
            error,
        });
    }
    if let Err(code) = emit(&report, output) {
        return code;
    }
    if failed {
        EXIT_EVAL
    } else {
        EXIT_OK
    }
}

fn parse_axioms(raw: &[String]) -> Result<Vec<AxiomId>, i32> {
    let mut out = Vec::new();
    for s in raw.iter().filter(|s| !s.trim().is_empty()) {
        match s.parse::<AxiomId>() {
            Ok(a) if !out.contains(&a) => out.push(a),
            Ok(_) => {}
            Err(e) => {
                eprintln!("error: {e}");
                return Err(EXIT_PARSE);
            }
        }
    }
    if out.is_empty() {
        eprintln!("error: no axioms requested");
        return Err(EXIT_PARSE);
    }
    Ok(out)
}

/// Audits the requested axioms on the file's scenarios and positions.
pub fn cmd_audit(args: &AuditArgs) -> i32 {
    let axioms = match parse_axioms(&args.axioms) {
        Ok(a) => a,
        Err(code) => return code,
    };
    if let Some(t) = args.tolerance {
        if !(t.is_finite() && t >= 0.0) {
            eprintln!("error: tolerance must be a nonnegative number");
            return EXIT_PARSE;
        }
    }
    let pf = match load(&args.io.input) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let family = InstanceFamily::with_universe(
        pf.scenarios.clone(),
        pf.positions.iter().map(|(_, x)| x.clone()).collect(),
    );
    let audit = audit_measure(&pf.measure, &family, &axioms, args.trials, args.seed, args.tolerance);
    let code = if audit.any_fail() {
        EXIT_FAIL
    } else if audit.all_pass() {
        EXIT_OK
    } else {
        EXIT_INCONCLUSIVE
    };
    for (a, r) in &audit.results {
        eprintln!("{a}: {} ({} checked, {} skipped)", r.verdict.short(), r.checked, r.skipped);
    }
    let mut report = ReportFile::new("audit", &pf.measure, Some(args.seed));
    report.audit = Some(audit);
    emit(&report, args.io.output.as_deref()).err().unwrap_or(code)
}

/// Recovers the distortion under one scenario and checks the representation.
pub fn cmd_recover(args: &RecoverArgs) -> i32 {
    let pf = match load(&args.io.input) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let Some(p) = pf.scenarios.get(&args.scenario) else {
        eprintln!("error: no scenario with id `{}`", args.scenario);
        return EXIT_PARSE;
    };
    let core = &pf.measure.core;
    let outcome = recover_distortion(core, p, args.grid).and_then(|h| {
        let rep = verify_choquet_rep(core, p, &h, args.trials, args.seed, args.tolerance)?;
        Ok((h, rep))
    });
    let (h, rep) = match outcome {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                TheoremError::InvalidInput(_) => EXIT_PARSE,
                _ => EXIT_EVAL,
            };
        }
    };
    let pass = rep.pass;
    let mut report = ReportFile::new("recover", &pf.measure, Some(args.seed));
    report.recovery = Some(RecoveryReport {
        scenario: args.scenario.clone(),
        distortion: h,
        representation: rep,
        verdict: if pass { "pass" } else { "fail" },
    });
    let code = if pass { EXIT_OK } else { EXIT_FAIL };
    emit(&report, args.io.output.as_deref()).err().unwrap_or(code)
}

/// Searches for witnesses; exit 1 when any axiom is violated.
pub fn cmd_witness(args: &WitnessArgs) -> i32 {
    let axioms = match parse_axioms(&args.axioms) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let pf = match load(&args.io.input) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let mut report = ReportFile::new("witness", &pf.measure, Some(args.seed));
    let (mut found, mut inconclusive) = (false, false);
    for axiom in axioms {
        let entry = match search_witness(axiom, &pf.measure, args.budget, args.seed) {
            Ok(w) => {
                found = true;
                WitnessReport {
                    axiom,
                    status: "found",
                    budget: args.budget,
                    witness: Some(w),
                    message: None,
                }
            }
            Err(e) => {
                let status = match e {
                    SearchError::NotFound { .. } => "not_found",
                    SearchError::Inconclusive { .. } => {
                        inconclusive = true;
                        "inconclusive"
                    }
                };
                WitnessReport {
                    axiom,
                    status,
                    budget: args.budget,
                    witness: None,
                    message: Some(e.to_string()),
                }
            }
        };
        eprintln!("{axiom}: {}", entry.status);
        report.witnesses.push(entry);
    }
    let code = if found {
        EXIT_FAIL
    } else if inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    emit(&report, args.io.output.as_deref()).err().unwrap_or(code)
}
