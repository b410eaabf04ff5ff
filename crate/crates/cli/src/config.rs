use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use nlheat::coefficients::{CoefficientSpec, DistributionSpec, Expr, MollifierSpec, Term};
use nlheat::evolve::{RunConfig, Scheme};
use nlheat::nets::{ConfigProblem, NetConfig, Perturbation, Smoothing};
use nlheat::spectral::{Dealias, GridSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Net,
    Uniqueness,
    Consistency,
    Check,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Net => "net",
            Command::Uniqueness => "uniqueness",
            Command::Consistency => "consistency",
            Command::Check => "check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    /// Member to solve; defaults to the smallest planned epsilon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

fn default_perturbation() -> Perturbation {
    Perturbation::ExpSmall
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessOptions {
    #[serde(default = "default_perturbation")]
    pub perturbation: Perturbation,
}

impl Default for UniquenessOptions {
    fn default() -> Self {
        Self {
            perturbation: default_perturbation(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsistencyOptions {
    #[serde(default)]
    pub smoothing: Smoothing,
}

fn default_fields() -> usize {
    100
}

fn default_random_runs() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOptions {
    /// Random fields per coefficient set in the form checks.
    #[serde(default = "default_fields")]
    pub fields: usize,
    /// Randomised variable-coefficient runs in the energy checks.
    #[serde(default = "default_random_runs")]
    pub random_runs: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            fields: default_fields(),
            random_runs: default_random_runs(),
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(".")
}

/// A complete experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Fractional order `s`.
    pub order: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub dealias: Dealias,
    pub grid: GridSpec,
    pub run: RunConfig,
    #[serde(default)]
    pub mollifier: MollifierSpec,
    pub coeff_a: CoefficientSpec,
    pub coeff_b: CoefficientSpec,
    pub coeff_c: CoefficientSpec,
    pub u0: DistributionSpec,
    #[serde(default)]
    pub solve: SolveOptions,
    #[serde(default)]
    pub uniqueness: UniquenessOptions,
    #[serde(default)]
    pub consistency: ConsistencyOptions,
    #[serde(default)]
    pub check: CheckOptions,
}

/// Problems found while reading a configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed TOML or a field of the wrong shape; carries the location.
    Parse(String),
    /// Semantic violations, each with a field path.
    Validation(Vec<ConfigProblem>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(msg) => write!(f, "parse error: {msg}"),
            ConfigError::Validation(problems) => {
                write!(f, "{} validation error(s)", problems.len())?;
                for p in problems {
                    write!(f, "\n  {p}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    /// The built-in configuration used when no file is given.
    pub fn default_for(command: Command) -> Self {
        let coeff = |base: f64, expr: Expr| {
            CoefficientSpec::new(
                1.0,
                DistributionSpec {
                    terms: vec![Term::Smooth {
                        expr: Expr::sum(vec![Expr::constant(base), expr]),
                    }],
                    nonnegative: true,
                },
            )
        };
        Self {
            command,
            seed: 0,
            output_dir: default_output_dir(),
            order: 0.5,
            epsilons: None,
            dealias: Dealias::default(),
            grid: GridSpec {
                dimension: 1,
                points: 4096,
                length: 2.0 * PI,
            },
            run: RunConfig::new(0.5, 0.01, Scheme::BackwardEuler),
            mollifier: MollifierSpec::default(),
            coeff_a: coeff(1.0, Expr::sin(1, 1.0)),
            coeff_b: coeff(0.5, Expr::cos(1, 0.5)),
            coeff_c: CoefficientSpec::constant(1.0),
            u0: DistributionSpec::smooth(Expr::gaussian(vec![PI], 0.3, 1.0)),
            solve: SolveOptions::default(),
            uniqueness: UniquenessOptions::default(),
            consistency: ConsistencyOptions::default(),
            check: CheckOptions::default(),
        }
    }

    pub fn net_config(&self) -> NetConfig {
        NetConfig {
            epsilons: self.epsilons.clone(),
            mollifier: self.mollifier,
            coeff_a: self.coeff_a.clone(),
            coeff_b: self.coeff_b.clone(),
            coeff_c: self.coeff_c.clone(),
            u0: self.u0.clone(),
            grid: self.grid,
            run: self.run,
            order: self.order,
            dealias: self.dealias,
        }
    }

    /// Every violated precondition reachable from this configuration.
    pub fn problems(&self) -> Vec<ConfigProblem> {
        let net = self.net_config();
        let mut out = net.problems();
        if out.iter().any(|p| p.path == "grid") {
            return out;
        }
        let plan = net.epsilon_plan();
        match self.command {
            Command::Solve => {
                if let Some(eps) = self.solve.epsilon {
                    if let Err(e) = self.mollifier.check_resolved(eps, &self.grid) {
                        out.push(ConfigProblem::new("solve.epsilon", e.to_string()));
                    }
                }
            }
            Command::Uniqueness => {
                if let Perturbation::Power { power } = self.uniqueness.perturbation {
                    if !(power > 0.0 && power.is_finite()) {
                        out.push(ConfigProblem::new(
                            "uniqueness.perturbation.power",
                            format!("must be positive, got {power}"),
                        ));
                    }
                }
                if plan.used.len() < 4 {
                    out.push(ConfigProblem::new(
                        "epsilons",
                        format!("uniqueness needs at least 4 resolved epsilons, got {}", plan.used.len()),
                    ));
                }
            }
            Command::Consistency => {
                for (name, spec) in [
                    ("coeff_a", &self.coeff_a.singular),
                    ("coeff_b", &self.coeff_b.singular),
                    ("coeff_c", &self.coeff_c.singular),
                    ("u0", &self.u0),
                ] {
                    if spec.has_singular_terms() {
                        out.push(ConfigProblem::new(
                            name,
                            "consistency needs smooth data; remove dirac terms",
                        ));
                    }
                }
                if plan.used.len() < 2 {
                    out.push(ConfigProblem::new(
                        "epsilons",
                        format!("consistency needs at least 2 resolved epsilons, got {}", plan.used.len()),
                    ));
                }
            }
            Command::Net | Command::Check => {}
        }
        if self.command == Command::Check && self.check.fields == 0 {
            out.push(ConfigProblem::new("check.fields", "must be positive"));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Validation(problems))
        }
    }

    /// Identity of the run: the first 16 hex digits of the SHA-256 of the
    /// canonical JSON form, with the output directory left out.
    pub fn run_id(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serialises");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        let canonical = serde_json::to_string(&value).expect("config serialises");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}

/// Parses and validates a configuration.
///
/// `command` fills in a missing `command` key; a conflicting key is reported
/// as a validation error.
pub fn parse_config_as(text: &str, command: Option<Command>) -> Result<ExperimentConfig, ConfigError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    if let Some(cmd) = command {
        match table.get("command").and_then(|v| v.as_str()) {
            Some(given) if given != cmd.name() => {
                return Err(ConfigError::Validation(vec![ConfigProblem::new(
                    "command",
                    format!("file says {given:?} but {:?} was requested", cmd.name()),
                )]));
            }
            _ => {
                table.insert("command".into(), toml::Value::String(cmd.name().into()));
            }
        }
    }
    let cfg: ExperimentConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_as(text, None)
}

/// TOML text that parses back to an equal configuration.
pub fn emit_config(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("config serialises to TOML")
}
