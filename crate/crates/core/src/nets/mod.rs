//! Nets of regularised solves indexed by `eps`: moderateness of the solution
//! net, negligibility of differences, and convergence to the regular solution.

mod consistency;
mod refinement;
mod uniqueness;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use consistency::{consistency_experiment, ConsistencyReport, Smoothing};
pub use refinement::{refinement_study, RefinementConfig, RefinementReport, TemporalOrder};
pub use uniqueness::{uniqueness_experiment, Perturbation, UniquenessReport, UniquenessVerdict};

use crate::coefficients::{
    fit_moderateness, regularize, regularize_coefficient, CoefficientSpec, DistributionSpec,
    ModerationReport, MollifierSpec, MIN_SAMPLES,
};
use crate::error::{Error, Result};
use crate::evolve::{solve_ivp, verify_apriori, RunConfig, Solution};
use crate::operator::{Floors, OperatorData};
use crate::spectral::{gradient_norm_sq, norms, Dealias, Field, GridSpec};

/// `{2^-3, ..., 2^-8}`.
pub fn default_epsilons() -> Vec<f64> {
    (3..=8).map(|k| 2f64.powi(-k)).collect()
}

/// A validation failure located by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigProblem {
    pub path: String,
    pub message: String,
}

impl ConfigProblem {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetConfig {
    /// Strictly decreasing values in `(0, 1]`; `None` selects [`default_epsilons`]
    /// with unresolved values dropped.
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub mollifier: MollifierSpec,
    pub coeff_a: CoefficientSpec,
    pub coeff_b: CoefficientSpec,
    pub coeff_c: CoefficientSpec,
    pub u0: DistributionSpec,
    pub grid: GridSpec,
    pub run: RunConfig,
    /// Fractional order `s`.
    pub order: f64,
    #[serde(default)]
    pub dealias: Dealias,
}

/// The `eps` values a net will use, and the defaults that were dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonPlan {
    pub used: Vec<f64>,
    pub clamped: Vec<f64>,
}

impl NetConfig {
    pub fn floors(&self) -> Floors {
        Floors {
            a0: self.coeff_a.floor,
            b0: self.coeff_b.floor,
            c0: self.coeff_c.floor,
        }
    }

    pub fn epsilon_plan(&self) -> EpsilonPlan {
        match &self.epsilons {
            Some(list) => EpsilonPlan {
                used: list.clone(),
                clamped: Vec::new(),
            },
            None => {
                let (used, clamped) = default_epsilons()
                    .into_iter()
                    .partition(|&e| self.mollifier.check_resolved(e, &self.grid).is_ok());
                EpsilonPlan { used, clamped }
            }
        }
    }

    /// Every violated precondition, with paths relative to the net configuration.
    pub fn problems(&self) -> Vec<ConfigProblem> {
        let mut out = Vec::new();
        if let Err(e) = self.grid.validate() {
            out.push(ConfigProblem::new("grid", e.to_string()));
            return out;
        }
        for (field, msg) in self.run.problems() {
            out.push(ConfigProblem::new(format!("run.{field}"), msg));
        }
        if !(self.order > 0.0 && self.order < 1.0) {
            out.push(ConfigProblem::new("order", format!("must lie in (0, 1), got {}", self.order)));
        }
        if let Err(e) = self.mollifier.validate() {
            out.push(ConfigProblem::new("mollifier", e.to_string()));
        }
        for (name, c) in [("coeff_a", &self.coeff_a), ("coeff_b", &self.coeff_b), ("coeff_c", &self.coeff_c)] {
            if let Err(e) = c.validate(&self.grid) {
                out.push(ConfigProblem::new(name, e.to_string()));
            }
        }
        if let Err(e) = self.u0.validate(&self.grid) {
            out.push(ConfigProblem::new("u0", e.to_string()));
        }
        let plan = self.epsilon_plan();
        match &self.epsilons {
            Some(list) => {
                if list.windows(2).any(|w| w[1] >= w[0]) {
                    out.push(ConfigProblem::new("epsilons", "must be strictly decreasing"));
                }
                for (i, &e) in list.iter().enumerate() {
                    if let Err(err) = self.mollifier.check_resolved(e, &self.grid) {
                        let kind = match err {
                            Error::UnresolvedKernel { .. } => "UnresolvedKernel: ",
                            Error::KernelTooWide { .. } => "KernelTooWide: ",
                            _ => "",
                        };
                        out.push(ConfigProblem::new(format!("epsilons[{i}]"), format!("{kind}{err}")));
                    }
                }
            }
            None if plan.used.is_empty() => {
                out.push(ConfigProblem::new("epsilons", "no default epsilon is resolved by the grid"));
            }
            None => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            let text: Vec<String> = problems.iter().map(|p| p.to_string()).collect();
            Err(Error::InvalidRun(text.join("; ")))
        }
    }
}

/// Regularised data of one net member.
pub struct MemberData {
    pub operator: OperatorData,
    pub u0: Field,
}

/// Regularises the configured data at `eps`.
pub fn member_data(cfg: &NetConfig, eps: f64) -> Result<MemberData> {
    let g = &cfg.grid;
    let m = &cfg.mollifier;
    let a = regularize_coefficient(&cfg.coeff_a, m, eps, g)?;
    let b = regularize_coefficient(&cfg.coeff_b, m, eps, g)?;
    let c = regularize_coefficient(&cfg.coeff_c, m, eps, g)?;
    let operator = OperatorData::new(a, b, c, cfg.order, cfg.floors())?.with_dealias(cfg.dealias);
    let u0 = regularize(&cfg.u0, m, eps, g)?;
    Ok(MemberData { operator, u0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub epsilon: f64,
    pub omega: f64,
    /// `sup_t ||u_eps(t)||_{H^1}^2` over snapshots.
    pub sup_t_h1_sq: Option<f64>,
    /// `sup_t |u_eps(t)|_{H^s}^2` over snapshots.
    pub sup_t_hs_sq: Option<f64>,
    pub apriori_lhs: Option<f64>,
    pub apriori_rhs: Option<f64>,
    pub apriori_satisfied: bool,
    pub c_eps: Option<f64>,
    pub cg_iterations: Option<usize>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Moderate,
    NotModerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetReport {
    pub epsilons: EpsilonPlan,
    pub per_eps: Vec<MemberReport>,
    /// Fit of `sup_t ||u_eps||_{H^1}` against `w(eps)`; absent with too few successful members.
    pub moderateness: Option<ModerationReport>,
    /// Fit of the a priori constants `C_eps`.
    pub c_eps_fit: Option<ModerationReport>,
    pub verdict: Verdict,
}

impl NetReport {
    pub fn all_apriori_satisfied(&self) -> bool {
        self.per_eps.iter().all(|m| m.apriori_satisfied)
    }
}

/// Sup over snapshots of `||u||_{H^1}^2` and `|u|_{H^s}^2`.
pub(crate) fn sup_norms(solution: &Solution, s: f64) -> Result<(f64, f64)> {
    let mut h1: f64 = 0.0;
    let mut hs: f64 = 0.0;
    for snap in &solution.snapshots {
        let n = norms(&snap.field, s)?;
        h1 = h1.max(n.h1 * n.h1);
        hs = hs.max(n.hs_seminorm * n.hs_seminorm);
    }
    Ok((h1, hs))
}

fn run_member(cfg: &NetConfig, eps: f64) -> MemberReport {
    let omega = cfg.mollifier.omega(eps);
    let outcome = (|| -> Result<MemberReport> {
        let data = member_data(cfg, eps)?;
        let solution = solve_ivp(&data.operator, &data.u0, &cfg.run)?;
        let (h1, hs) = sup_norms(&solution, cfg.order)?;
        let apriori = verify_apriori(&data.operator, &solution, &data.u0)?;
        Ok(MemberReport {
            epsilon: eps,
            omega,
            sup_t_h1_sq: Some(h1),
            sup_t_hs_sq: Some(hs),
            apriori_lhs: Some(apriori.lhs_max),
            apriori_rhs: Some(apriori.rhs),
            apriori_satisfied: apriori.satisfied,
            c_eps: Some(apriori.constant),
            cg_iterations: Some(solution.trace.cg_iterations.iter().sum()),
            failure: None,
        })
    })();
    outcome.unwrap_or_else(|e| MemberReport {
        epsilon: eps,
        omega,
        sup_t_h1_sq: None,
        sup_t_hs_sq: None,
        apriori_lhs: None,
        apriori_rhs: None,
        apriori_satisfied: false,
        c_eps: None,
        cg_iterations: None,
        failure: Some(e.to_string()),
    })
}

/// Aborts when more than half of the members failed.
pub(crate) fn check_failures<'a>(failures: impl Iterator<Item = &'a str>, total: usize) -> Result<()> {
    let failed: Vec<&str> = failures.collect();
    if 2 * failed.len() > total {
        return Err(Error::NetAborted {
            failed: failed.len(),
            total,
            first: failed[0].to_string(),
        });
    }
    Ok(())
}

/// Fit over the successful members, if there are enough of them.
fn fit_successful(members: &[MemberReport], value: impl Fn(&MemberReport) -> Option<f64>, p: f64) -> Result<Option<ModerationReport>> {
    let (eps, vals): (Vec<f64>, Vec<f64>) = members
        .iter()
        .filter_map(|m| value(m).map(|v| (m.epsilon, v)))
        .unzip();
    if eps.len() < MIN_SAMPLES || vals.iter().any(|v| *v <= 0.0) {
        return Ok(None);
    }
    fit_moderateness(&eps, &vals, p).map(Some)
}

pub fn run_net(cfg: &NetConfig) -> Result<NetReport> {
    cfg.validate()?;
    let plan = cfg.epsilon_plan();
    let per_eps: Vec<MemberReport> = plan.used.par_iter().map(|&e| run_member(cfg, e)).collect();
    check_failures(per_eps.iter().filter_map(|m| m.failure.as_deref()), per_eps.len())?;

    let p = cfg.mollifier.scale_power;
    let moderateness = fit_successful(&per_eps, |m| m.sup_t_h1_sq.map(f64::sqrt), p)?;
    let c_eps_fit = fit_successful(&per_eps, |m| m.c_eps, p)?;
    let verdict = match &moderateness {
        Some(r) if r.is_moderate() => Verdict::Moderate,
        _ => Verdict::NotModerate,
    };
    Ok(NetReport {
        epsilons: plan,
        per_eps,
        moderateness,
        c_eps_fit,
        verdict,
    })
}

/// `sup_t ||w||_{L^2} + (int_0^T ||w||_{H^1}^2 dt)^{1/2}` for `w = a - b`, trapezoid rule over snapshots.
pub(crate) fn difference_norms(a: &Solution, b: &Solution) -> Result<(f64, f64)> {
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Error::TraceMismatch("solutions have different snapshot sets".into()));
    }
    let mut sup_l2: f64 = 0.0;
    let mut samples = Vec::with_capacity(a.snapshots.len());
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        if x.time != y.time {
            return Err(Error::TraceMismatch("snapshot times differ".into()));
        }
        let w = x.field.sub(&y.field)?;
        sup_l2 = sup_l2.max(w.l2_norm());
        samples.push((x.time, w.l2_norm_sq() + gradient_norm_sq(&w)));
    }
    let integral: f64 = samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    Ok((sup_l2, integral.sqrt()))
}
