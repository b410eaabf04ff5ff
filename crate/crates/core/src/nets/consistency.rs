use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{difference_norms, member_data, MemberData, NetConfig};
use crate::coefficients::loglog_fit;
use crate::error::{Error, Result};
use crate::evolve::{solve_ivp, Solution};
use crate::operator::OperatorData;

/// Whether net members use mollified data or the unmollified data of the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    #[default]
    Mollified,
    Disabled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub epsilons: Vec<f64>,
    pub omegas: Vec<f64>,
    /// `max_t ||u_eps(t) - u(t)||_{L^2}` over snapshots.
    pub errors_cl2: Vec<f64>,
    /// `(int_0^T ||u_eps - u||_{H^1}^2 dt)^{1/2}`.
    pub errors_l2h1: Vec<f64>,
    /// Log-log slope of the errors against `w(eps)`; absent when an error vanishes.
    pub rate_cl2: Option<f64>,
    pub rate_l2h1: Option<f64>,
    pub monotone: bool,
}

fn regular_data(cfg: &NetConfig) -> Result<MemberData> {
    let g = &cfg.grid;
    for (name, spec) in [
        ("coeff_a", &cfg.coeff_a.singular),
        ("coeff_b", &cfg.coeff_b.singular),
        ("coeff_c", &cfg.coeff_c.singular),
        ("u0", &cfg.u0),
    ] {
        if spec.has_singular_terms() {
            return Err(Error::NotRegularData(format!("{name} contains point masses")));
        }
    }
    let operator = OperatorData::new(
        cfg.coeff_a.sample_unmollified(g)?,
        cfg.coeff_b.sample_unmollified(g)?,
        cfg.coeff_c.sample_unmollified(g)?,
        cfg.order,
        cfg.floors(),
    )?
    .with_dealias(cfg.dealias);
    Ok(MemberData {
        operator,
        u0: cfg.u0.sample_smooth(g),
    })
}

fn rate(omegas: &[f64], errors: &[f64]) -> Option<f64> {
    if errors.len() < 2 || errors.iter().any(|e| *e <= 0.0) {
        None
    } else {
        Some(loglog_fit(omegas, errors).slope)
    }
}

/// Compares each regularised solve with the solve on unmollified data
/// (same grid and step).
pub fn consistency_experiment(cfg: &NetConfig, smoothing: Smoothing) -> Result<ConsistencyReport> {
    cfg.validate()?;
    let reference_data = regular_data(cfg)?;
    let eps = cfg.epsilon_plan().used;
    let reference = solve_ivp(&reference_data.operator, &reference_data.u0, &cfg.run)?;
    let errors: Vec<(f64, f64)> = eps
        .par_iter()
        .map(|&e| -> Result<(f64, f64)> {
            let solution: Solution = match smoothing {
                Smoothing::Mollified => {
                    let data = member_data(cfg, e)?;
                    solve_ivp(&data.operator, &data.u0, &cfg.run)?
                }
                Smoothing::Disabled => {
                    let data = regular_data(cfg)?;
                    solve_ivp(&data.operator, &data.u0, &cfg.run)?
                }
            };
            difference_norms(&solution, &reference)
        })
        .collect::<Result<_>>()?;
    let omegas: Vec<f64> = eps.iter().map(|&e| cfg.mollifier.omega(e)).collect();
    let (errors_cl2, errors_l2h1): (Vec<f64>, Vec<f64>) = errors.into_iter().unzip();
    let nonincreasing = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
    Ok(ConsistencyReport {
        rate_cl2: rate(&omegas, &errors_cl2),
        rate_l2h1: rate(&omegas, &errors_l2h1),
        monotone: nonincreasing(&errors_cl2) && nonincreasing(&errors_l2h1),
        epsilons: eps,
        omegas,
        errors_cl2,
        errors_l2h1,
    })
}
