use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nlheat::evolve::{
    solve_ivp, verify_apriori, verify_energy_monotonicity, AprioriReport, EnergyTrace,
    MonotonicityReport,
};
use nlheat::nets::{
    consistency_experiment, member_data, run_net, uniqueness_experiment, ConsistencyReport,
    NetReport, UniquenessReport,
};
use serde::Serialize;

use crate::check::{run_check, CheckReport};
use crate::config::{Command, ConfigError, ExperimentConfig};

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("solver failure: {0}")]
    Solver(#[from] nlheat::Error),
    #[error("property suite failed: {}", .0.join(", "))]
    PropertyFailure(Vec<String>),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Io { .. } => 1,
            RunError::Config(_) => 2,
            RunError::Solver(_) => 3,
            RunError::PropertyFailure(_) => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotRecord {
    pub step: usize,
    pub time: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub epsilon: f64,
    pub omega: f64,
    pub dt: f64,
    pub steps: usize,
    pub monotonicity: MonotonicityReport,
    pub apriori: AprioriReport,
    pub snapshots: Vec<SnapshotRecord>,
    #[serde(skip)]
    pub trace: EnergyTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Results {
    Solve(SolveReport),
    Net(NetReport),
    Uniqueness(UniquenessReport),
    Consistency(ConsistencyReport),
    Check(CheckReport),
}

/// Finished results together with the identity of the run that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub command: Command,
    pub run_id: String,
    pub seed: u64,
    pub results: Results,
}

fn solve(cfg: &ExperimentConfig) -> Result<SolveReport, RunError> {
    let net = cfg.net_config();
    let epsilon = match cfg.solve.epsilon {
        Some(e) => e,
        None => *net.epsilon_plan().used.last().expect("validated configs plan at least one epsilon"),
    };
    let data = member_data(&net, epsilon)?;
    let solution = solve_ivp(&data.operator, &data.u0, &cfg.run)?;
    let apriori = verify_apriori(&data.operator, &solution, &data.u0)?;
    let monotonicity = verify_energy_monotonicity(&solution.trace);
    let snapshots = solution
        .snapshots
        .iter()
        .map(|s| SnapshotRecord {
            step: s.step,
            time: s.time,
            values: s.field.values().to_vec(),
        })
        .collect();
    Ok(SolveReport {
        epsilon,
        omega: cfg.mollifier.omega(epsilon),
        dt: solution.dt,
        steps: solution.trace.len() - 1,
        monotonicity,
        apriori,
        snapshots,
        trace: solution.trace,
    })
}

/// Validates `cfg` and runs its command. Failed properties are part of the
/// returned report; see [`property_status`].
pub fn run_command(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let net = cfg.net_config();
    let results = match cfg.command {
        Command::Solve => Results::Solve(solve(cfg)?),
        Command::Net => Results::Net(run_net(&net)?),
        Command::Uniqueness => Results::Uniqueness(uniqueness_experiment(&net, cfg.uniqueness.perturbation)?),
        Command::Consistency => Results::Consistency(consistency_experiment(&net, cfg.consistency.smoothing)?),
        Command::Check => Results::Check(run_check(cfg)?),
    };
    Ok(RunOutput {
        command: cfg.command,
        run_id: cfg.run_id(),
        seed: cfg.seed,
        results,
    })
}

/// Full-precision decimal form used in every CSV column.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

pub const NET_CSV_HEADER: &str =
    "epsilon,omega,sup_t_h1_sq,sup_t_hs_sq,apriori_lhs,apriori_rhs,apriori_satisfied,c_eps,cg_iterations,failure";
pub const UNIQUENESS_CSV_HEADER: &str = "epsilon,sup_l2,l2_h1,difference_norm";
pub const CONSISTENCY_CSV_HEADER: &str = "epsilon,omega,error_cl2,error_l2h1";
pub const CHECK_CSV_HEADER: &str = "property,value,tolerance,passed";

impl Results {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Results::Solve(r) => out = r.trace.to_csv(),
            Results::Net(r) => {
                writeln!(out, "{NET_CSV_HEADER}").unwrap();
                for m in &r.per_eps {
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{}",
                        num(m.epsilon),
                        num(m.omega),
                        opt(m.sup_t_h1_sq),
                        opt(m.sup_t_hs_sq),
                        opt(m.apriori_lhs),
                        opt(m.apriori_rhs),
                        m.apriori_satisfied,
                        opt(m.c_eps),
                        m.cg_iterations.map(|c| c.to_string()).unwrap_or_default(),
                        csv_field(m.failure.as_deref().unwrap_or("")),
                    )
                    .unwrap();
                }
            }
            Results::Uniqueness(r) => {
                writeln!(out, "{UNIQUENESS_CSV_HEADER}").unwrap();
                for i in 0..r.epsilons.len() {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        num(r.epsilons[i]),
                        num(r.sup_l2[i]),
                        num(r.l2_h1[i]),
                        num(r.difference_norms[i])
                    )
                    .unwrap();
                }
            }
            Results::Consistency(r) => {
                writeln!(out, "{CONSISTENCY_CSV_HEADER}").unwrap();
                for i in 0..r.epsilons.len() {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        num(r.epsilons[i]),
                        num(r.omegas[i]),
                        num(r.errors_cl2[i]),
                        num(r.errors_l2h1[i])
                    )
                    .unwrap();
                }
            }
            Results::Check(r) => {
                writeln!(out, "{CHECK_CSV_HEADER}").unwrap();
                for p in &r.properties {
                    writeln!(out, "{},{},{},{}", p.name, num(p.value), num(p.tolerance), p.passed).unwrap();
                }
            }
        }
        out
    }

    fn report_json(&self) -> serde_json::Value {
        let v = match self {
            Results::Solve(r) => serde_json::to_value(r),
            Results::Net(r) => serde_json::to_value(r),
            Results::Uniqueness(r) => serde_json::to_value(r),
            Results::Consistency(r) => serde_json::to_value(r),
            Results::Check(r) => serde_json::to_value(r),
        };
        v.expect("reports serialise to JSON")
    }
}

impl RunOutput {
    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "command": self.command,
            "run_id": self.run_id,
            "seed": self.seed,
            "report": self.results.report_json(),
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("reports serialise to JSON");
        text.push('\n');
        text
    }

    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.command, self.run_id)
    }
}

/// Writes `<command>_<run id>.csv` and `.json` into `dir`, which must exist.
pub fn emit_reports(output: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    ensure_output_dir(dir)?;
    let stem = output.file_stem();
    let mut written = Vec::new();
    for (ext, body) in [("csv", output.results.to_csv()), ("json", output.to_json())] {
        let path = dir.join(format!("{stem}.{ext}"));
        fs::write(&path, body).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

pub fn ensure_output_dir(dir: &Path) -> Result<(), RunError> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(RunError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        })
    }
}

/// Error for a finished run whose property suite reported failures.
pub fn property_status(output: &RunOutput) -> Result<(), RunError> {
    match &output.results {
        Results::Check(r) if !r.all_passed() => Err(RunError::PropertyFailure(
            r.properties.iter().filter(|p| !p.passed).map(|p| p.name.clone()).collect(),
        )),
        _ => Ok(()),
    }
}
