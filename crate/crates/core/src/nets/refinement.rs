use serde::{Deserialize, Serialize};

use crate::coefficients::loglog_fit;
use crate::error::{Error, Result};
use crate::evolve::{solve_ivp, RunConfig, Scheme};
use crate::operator::OperatorData;
use crate::spectral::{forward_transform, Field, GridSpec};

/// Constant-coefficient problem with a finite cosine series as initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementConfig {
    pub length: f64,
    pub order: f64,
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    /// `(mode, amplitude)` pairs of `u0 = sum amplitude cos(2 pi mode x / L)`.
    pub modes: Vec<(i64, f64)>,
    pub final_time: f64,
    pub dts: Vec<f64>,
    /// Grid sizes for the spatial check.
    pub points: Vec<usize>,
    /// Step used for the spatial check.
    pub spatial_dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalOrder {
    pub scheme: Scheme,
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub temporal_orders: Vec<TemporalOrder>,
    /// `(n, max |computed - expected| decay factor)` over excited modes.
    pub spatial_errors: Vec<(usize, f64)>,
}

impl RefinementConfig {
    fn validate(&self) -> Result<()> {
        if self.modes.is_empty() || self.dts.len() < 2 || self.points.is_empty() {
            return Err(Error::InvalidRun(
                "refinement needs modes, at least two steps and one grid size".into(),
            ));
        }
        Ok(())
    }

    fn lambda(&self, mode: i64) -> f64 {
        let k = 2.0 * std::f64::consts::PI * mode.abs() as f64 / self.length;
        self.a0 * k * k + self.b0 * k.powf(2.0 * self.order) + self.c0
    }

    fn setup(&self, n: usize) -> Result<(OperatorData, Field)> {
        let g = GridSpec::new(1, n, self.length)?;
        for &(m, _) in &self.modes {
            if 2 * m.unsigned_abs() as usize >= n {
                return Err(Error::InvalidRun(format!("mode {m} is not resolved with n = {n}")));
            }
        }
        let p = OperatorData::constant(g, self.order, self.a0, self.b0, self.c0)?;
        let l = self.length;
        let u0 = Field::from_fn(g, |x| {
            self.modes
                .iter()
                .map(|&(m, a)| a * (2.0 * std::f64::consts::PI * m as f64 * x[0] / l).cos())
                .sum()
        });
        Ok((p, u0))
    }
}

fn amplification(scheme: Scheme, z: f64) -> f64 {
    match scheme {
        Scheme::BackwardEuler => 1.0 / (1.0 + z),
        Scheme::CrankNicolson => (1.0 - z / 2.0) / (1.0 + z / 2.0),
    }
}

pub fn refinement_study(cfg: &RefinementConfig) -> Result<RefinementReport> {
    cfg.validate()?;
    let n_time = cfg.points[cfg.points.len() - 1];
    let (p, u0) = cfg.setup(n_time)?;
    let l = cfg.length;
    let exact = Field::from_fn(*u0.grid(), |x| {
        cfg.modes
            .iter()
            .map(|&(m, a)| {
                a * (-cfg.lambda(m) * cfg.final_time).exp()
                    * (2.0 * std::f64::consts::PI * m as f64 * x[0] / l).cos()
            })
            .sum()
    });
    let mut temporal_orders = Vec::new();
    for scheme in [Scheme::BackwardEuler, Scheme::CrankNicolson] {
        let mut errors = Vec::new();
        for &dt in &cfg.dts {
            let run = RunConfig::new(cfg.final_time, dt, scheme).with_stride(usize::MAX);
            let sol = solve_ivp(&p, &u0, &run)?;
            errors.push(sol.final_state().sub(&exact)?.l2_norm());
        }
        let order = loglog_fit(&cfg.dts, &errors).slope;
        temporal_orders.push(TemporalOrder {
            scheme,
            dts: cfg.dts.clone(),
            errors,
            order,
        });
    }

    let mut spatial_errors = Vec::new();
    for &n in &cfg.points {
        let (p, u0) = cfg.setup(n)?;
        let run = RunConfig::new(cfg.final_time, cfg.spatial_dt, Scheme::BackwardEuler)
            .with_stride(usize::MAX);
        let sol = solve_ivp(&p, &u0, &run)?;
        let steps = run.steps() as i32;
        let before = forward_transform(&u0);
        let after = forward_transform(sol.final_state());
        let mut worst: f64 = 0.0;
        for &(m, _) in &cfg.modes {
            let c0 = before.at([m, 0]);
            let factor = (after.at([m, 0]) / c0).re;
            let expected = amplification(Scheme::BackwardEuler, sol.dt * cfg.lambda(m)).powi(steps);
            worst = worst.max((factor - expected).abs());
        }
        spatial_errors.push((n, worst));
    }
    Ok(RefinementReport {
        temporal_orders,
        spatial_errors,
    })
}
