use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{difference_norms, member_data, MemberData, NetConfig};
use crate::coefficients::{
    fit_moderateness, negligibility_profile, negligible_up_to, MAX_NEGLIGIBILITY_ORDER, MIN_SAMPLES,
};
use crate::error::{Error, Result};
use crate::evolve::solve_ivp;
use crate::operator::OperatorData;
use crate::spectral::Field;

/// Perturbation applied to the second net of a uniqueness experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Perturbation {
    None,
    /// `exp(-1/w(eps))` added to each coefficient.
    ExpSmall,
    /// `exp(-1/w(eps))` times a Gaussian bump added to the initial data.
    InitialExpSmall,
    /// `w(eps)^power` added to each coefficient; not negligible.
    Power { power: f64 },
}

impl Perturbation {
    fn amplitude(&self, omega: f64) -> f64 {
        match self {
            Perturbation::None => 0.0,
            Perturbation::ExpSmall | Perturbation::InitialExpSmall => (-1.0 / omega).exp(),
            Perturbation::Power { power } => omega.powf(*power),
        }
    }

    fn apply(&self, data: &MemberData, omega: f64) -> Result<MemberData> {
        let amp = self.amplitude(omega);
        let p = &data.operator;
        match self {
            Perturbation::None => Ok(MemberData {
                operator: p.clone(),
                u0: data.u0.clone(),
            }),
            Perturbation::ExpSmall | Perturbation::Power { .. } => Ok(MemberData {
                operator: OperatorData::new(
                    p.a().shift(amp),
                    p.b().shift(amp),
                    p.c().shift(amp),
                    p.order(),
                    p.floors(),
                )?
                .with_dealias(p.dealias()),
                u0: data.u0.clone(),
            }),
            Perturbation::InitialExpSmall => {
                let g = *data.u0.grid();
                let width = g.length / 16.0;
                let centre = g.length / 2.0;
                let bump = Field::from_fn(g, |x| {
                    let r2: f64 = x[..g.dimension].iter().map(|v| (v - centre).powi(2)).sum();
                    (-r2 / (2.0 * width * width)).exp()
                });
                Ok(MemberData {
                    operator: p.clone(),
                    u0: data.u0.add(&bump.scale(amp))?,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniquenessVerdict {
    /// Differences pass every order up to the maximum probed.
    Negligible,
    NotNegligible,
    /// One of the two solution nets failed the moderateness fit.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub perturbation: Perturbation,
    pub epsilons: Vec<f64>,
    /// `sup_t ||w||_{L^2}`.
    pub sup_l2: Vec<f64>,
    /// `(int_0^T ||w||_{H^1}^2 dt)^{1/2}`.
    pub l2_h1: Vec<f64>,
    /// Sum of the two norms above; the quantity tested.
    pub difference_norms: Vec<f64>,
    pub per_q: Vec<(u32, bool)>,
    pub negligible_up_to_q: Option<u32>,
    pub base_moderate: bool,
    pub perturbed_moderate: bool,
    pub verdict: UniquenessVerdict,
}

struct PairOutcome {
    sup_l2: f64,
    l2_h1: f64,
    base_h1: f64,
    perturbed_h1: f64,
}

fn run_pair(cfg: &NetConfig, eps: f64, perturbation: Perturbation) -> Result<PairOutcome> {
    let omega = cfg.mollifier.omega(eps);
    let base = member_data(cfg, eps)?;
    let perturbed = perturbation.apply(&base, omega)?;
    let (a, b) = rayon::join(
        || solve_ivp(&base.operator, &base.u0, &cfg.run),
        || solve_ivp(&perturbed.operator, &perturbed.u0, &cfg.run),
    );
    let (a, b) = (a?, b?);
    let (sup_l2, l2_h1) = difference_norms(&a, &b)?;
    let (base_h1, _) = super::sup_norms(&a, cfg.order)?;
    let (perturbed_h1, _) = super::sup_norms(&b, cfg.order)?;
    Ok(PairOutcome {
        sup_l2,
        l2_h1,
        base_h1: base_h1.sqrt(),
        perturbed_h1: perturbed_h1.sqrt(),
    })
}

/// Runs the net as given and with a perturbation, and tests the difference net
/// for negligibility.
pub fn uniqueness_experiment(cfg: &NetConfig, perturbation: Perturbation) -> Result<UniquenessReport> {
    cfg.validate()?;
    let eps = cfg.epsilon_plan().used;
    if eps.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: eps.len(),
        });
    }
    let outcomes: Vec<PairOutcome> = eps
        .par_iter()
        .map(|&e| run_pair(cfg, e, perturbation))
        .collect::<Result<_>>()?;

    let sup_l2: Vec<f64> = outcomes.iter().map(|o| o.sup_l2).collect();
    let l2_h1: Vec<f64> = outcomes.iter().map(|o| o.l2_h1).collect();
    let difference_norms: Vec<f64> = sup_l2.iter().zip(&l2_h1).map(|(a, b)| a + b).collect();
    let p = cfg.mollifier.scale_power;
    let per_q = negligibility_profile(&eps, &difference_norms, p, MAX_NEGLIGIBILITY_ORDER)?;
    let moderate = |v: Vec<f64>| -> Result<bool> {
        if v.iter().any(|x| *x <= 0.0) {
            return Ok(false);
        }
        Ok(fit_moderateness(&eps, &v, p)?.is_moderate())
    };
    let base_moderate = moderate(outcomes.iter().map(|o| o.base_h1).collect())?;
    let perturbed_moderate = moderate(outcomes.iter().map(|o| o.perturbed_h1).collect())?;
    let up_to = negligible_up_to(&per_q);
    let verdict = if !(base_moderate && perturbed_moderate) {
        UniquenessVerdict::Inconclusive
    } else if up_to == Some(MAX_NEGLIGIBILITY_ORDER) {
        UniquenessVerdict::Negligible
    } else {
        UniquenessVerdict::NotNegligible
    };
    Ok(UniquenessReport {
        perturbation,
        epsilons: eps,
        sup_l2,
        l2_h1,
        difference_norms,
        per_q,
        negligible_up_to_q: up_to,
        base_moderate,
        perturbed_moderate,
        verdict,
    })
}
