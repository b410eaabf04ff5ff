//! Implicit time stepping for `u_t + L u = 0` with energy bookkeeping.

mod config;
mod trace;

use serde::{Deserialize, Serialize};

pub use config::{RunConfig, Scheme};
pub use trace::{EnergyTrace, TRACE_CSV_HEADER};

use crate::error::{Error, Result};
use crate::operator::{apply_l, apriori_constant, apriori_quantity, energy, OperatorData};
use crate::spectral::{dot, forward_raw, inverse_real, norms, Field};

/// Relative slack in the monotonicity and a priori checks.
pub const ENERGY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 500,
        }
    }
}

impl From<&RunConfig> for CgOptions {
    fn from(cfg: &RunConfig) -> Self {
        Self {
            rel_tol: cfg.cg_rel_tol,
            max_iter: cfg.cg_max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub u_next: Field,
    pub cg_iters: usize,
    pub residual: f64,
}

/// `x + theta_dt L x`.
fn shifted(p: &OperatorData, x: &Field, theta_dt: f64) -> Result<Vec<f64>> {
    let lx = apply_l(p, x)?;
    Ok(x
        .values()
        .iter()
        .zip(lx.values())
        .map(|(a, b)| a + theta_dt * b)
        .collect())
}

/// Inverse of the floor symbol `1 + theta_dt (a0 |k|^2 + b0 |k|^{2s} + c0)`, applied spectrally.
fn precondition(p: &OperatorData, r: &[f64], theta_dt: f64) -> Vec<f64> {
    let grid = p.grid();
    let mut c = forward_raw(grid, r);
    for (i, v) in c.iter_mut().enumerate() {
        *v /= 1.0 + theta_dt * p.floor_symbol(&grid.wave_vector(i));
    }
    inverse_real(grid, c)
}

/// Preconditioned conjugate gradients for `(I + theta_dt L) x = b`.
///
/// Stops once both the plain and the preconditioned relative residual are
/// below `rel_tol`.
fn pcg(p: &OperatorData, b: &Field, x0: Field, theta_dt: f64, opts: CgOptions) -> Result<(Field, usize, f64)> {
    let grid = *p.grid();
    let b_norm = dot(b.values(), b.values()).sqrt();
    if b_norm == 0.0 {
        return Ok((Field::zeros(grid), 0, 0.0));
    }
    let b_pre = dot(b.values(), &precondition(p, b.values(), theta_dt)).sqrt();

    let mut x = x0.into_values();
    let ax = shifted(p, &Field::from_raw(grid, x.clone()), theta_dt)?;
    let mut r: Vec<f64> = b.values().iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z = precondition(p, &r, theta_dt);
    let mut rz = dot(&r, &z);
    let residual = |r: &[f64], rz: f64| (dot(r, r).sqrt() / b_norm).max(rz.max(0.0).sqrt() / b_pre);
    let mut res = residual(&r, rz);
    if res <= opts.rel_tol {
        return Ok((Field::from_raw(grid, x), 0, res));
    }
    let mut dir = z.clone();
    for k in 1..=opts.max_iter {
        let ad = shifted(p, &Field::from_raw(grid, dir.clone()), theta_dt)?;
        let alpha = rz / dot(&dir, &ad);
        for i in 0..x.len() {
            x[i] += alpha * dir[i];
            r[i] -= alpha * ad[i];
        }
        z = precondition(p, &r, theta_dt);
        let rz_next = dot(&r, &z);
        res = residual(&r, rz_next);
        if res <= opts.rel_tol {
            return Ok((Field::from_raw(grid, x), k, res));
        }
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..dir.len() {
            dir[i] = z[i] + beta * dir[i];
        }
    }
    Err(Error::CgDivergence {
        step: None,
        iterations: opts.max_iter,
        residual: res,
    })
}

/// One implicit step: `(I + theta dt L) u_{n+1} = (I - (1 - theta) dt L) u_n`.
pub fn implicit_step(
    p: &OperatorData,
    u_n: &Field,
    dt: f64,
    scheme: Scheme,
    opts: CgOptions,
) -> Result<StepResult> {
    p.a().ensure_same_grid(u_n)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidRun(format!("dt must be positive, got {dt}")));
    }
    let theta = scheme.theta();
    let rhs = match scheme {
        Scheme::BackwardEuler => u_n.clone(),
        Scheme::CrankNicolson => {
            let lu = apply_l(p, u_n)?;
            u_n.zip_unchecked(&lu, |u, l| u - (1.0 - theta) * dt * l)
        }
    };
    let (u_next, cg_iters, residual) = pcg(p, &rhs, u_n.clone(), theta * dt, opts)?;
    Ok(StepResult {
        u_next,
        cg_iters,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub field: Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub snapshots: Vec<Snapshot>,
    pub trace: EnergyTrace,
    /// Step actually used, `final_time / steps`.
    pub dt: f64,
}

impl Solution {
    pub fn final_state(&self) -> &Field {
        &self.snapshots.last().expect("solution has snapshots").field
    }
}

pub fn solve_ivp(p: &OperatorData, u0: &Field, cfg: &RunConfig) -> Result<Solution> {
    cfg.validate()?;
    p.a().ensure_same_grid(u0)?;
    let steps = cfg.steps();
    let dt = cfg.effective_dt();
    let opts = CgOptions::from(cfg);

    let mut trace = EnergyTrace::default();
    trace.push(0.0, energy(p, u0)?, 0.0, 0);
    let mut snapshots = vec![Snapshot {
        step: 0,
        time: 0.0,
        field: u0.clone(),
    }];
    let mut u = u0.clone();
    for step in 1..=steps {
        let next = implicit_step(p, &u, dt, cfg.scheme, opts).map_err(|e| match e {
            Error::CgDivergence {
                iterations,
                residual,
                ..
            } => Error::CgDivergence {
                step: Some(step),
                iterations,
                residual,
            },
            other => other,
        })?;
        let time = if step == steps {
            cfg.final_time
        } else {
            step as f64 * dt
        };
        let ut = next.u_next.zip_unchecked(&u, |a, b| (a - b) / dt).l2_norm_sq();
        trace.push(time, energy(p, &next.u_next)?, ut, next.cg_iters);
        u = next.u_next;
        if step % cfg.snapshot_stride == 0 || step == steps {
            snapshots.push(Snapshot {
                step,
                time,
                field: u.clone(),
            });
        }
    }
    Ok(Solution {
        snapshots,
        trace,
        dt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub monotone_l2: bool,
    pub monotone_total: bool,
    /// Largest increase of `l2_sq` or `total` between consecutive entries.
    pub max_violation: f64,
}

pub fn verify_energy_monotonicity(trace: &EnergyTrace) -> MonotonicityReport {
    let mut report = MonotonicityReport {
        monotone_l2: true,
        monotone_total: true,
        max_violation: 0.0,
    };
    for w in trace.breakdowns.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        if next.l2_sq > prev.l2_sq * (1.0 + ENERGY_SLACK) {
            report.monotone_l2 = false;
        }
        if next.total > prev.total * (1.0 + ENERGY_SLACK) {
            report.monotone_total = false;
        }
        let rise = (next.l2_sq - prev.l2_sq).max(next.total - prev.total);
        report.max_violation = report.max_violation.max(rise);
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    /// Max over snapshots of `||u||^2 + ||grad u||^2 + ||(-Delta)^{s/2} u||^2`.
    pub lhs_max: f64,
    /// `C ||u0||_{H^1}^2`.
    pub rhs: f64,
    pub constant: f64,
    pub satisfied: bool,
}

pub fn verify_apriori(p: &OperatorData, solution: &Solution, u0: &Field) -> Result<AprioriReport> {
    let trace = &solution.trace;
    trace.validate()?;
    if solution.snapshots.is_empty() {
        return Err(Error::TraceMismatch("no snapshots recorded".into()));
    }
    if solution.snapshots[0].time != 0.0 || solution.snapshots[0].field != *u0 {
        return Err(Error::TraceMismatch("first snapshot is not the initial state".into()));
    }
    for snap in &solution.snapshots {
        if trace.times.get(snap.step) != Some(&snap.time) {
            return Err(Error::TraceMismatch(format!(
                "snapshot at step {} (t = {}) has no trace entry",
                snap.step, snap.time
            )));
        }
    }
    let s = p.order();
    let mut lhs_max: f64 = 0.0;
    for snap in &solution.snapshots {
        lhs_max = lhs_max.max(apriori_quantity(&snap.field, s)?);
    }
    let constant = apriori_constant(p);
    let h1 = norms(u0, s)?.h1;
    let rhs = constant * h1 * h1;
    Ok(AprioriReport {
        lhs_max,
        rhs,
        constant,
        satisfied: lhs_max <= rhs * (1.0 + ENERGY_SLACK),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use std::f64::consts::PI;

    fn unit(g: GridSpec) -> OperatorData {
        OperatorData::constant(g, 0.5, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn eigenmode_step() {
        let g = GridSpec::new(1, 32, 2.0 * PI).unwrap();
        let p = OperatorData::constant(g, 0.3, 2.0, 0.5, 0.7).unwrap();
        let k = 3.0_f64;
        let lam = 2.0 * k * k + 0.5 * k.powf(0.6) + 0.7;
        let u = Field::from_fn(g, |x| (k * x[0]).cos());
        let dt = 0.05;
        let be = implicit_step(&p, &u, dt, Scheme::BackwardEuler, CgOptions::default()).unwrap();
        let cn = implicit_step(&p, &u, dt, Scheme::CrankNicolson, CgOptions::default()).unwrap();
        for i in 0..g.len() {
            let want_be = u.values()[i] / (1.0 + dt * lam);
            let want_cn = u.values()[i] * (1.0 - dt * lam / 2.0) / (1.0 + dt * lam / 2.0);
            assert!((be.u_next.values()[i] - want_be).abs() < 1e-10);
            assert!((cn.u_next.values()[i] - want_cn).abs() < 1e-10);
        }
        assert!(be.cg_iters <= 2);
    }

    #[test]
    fn zero_state_takes_no_iterations() {
        let g = GridSpec::new(1, 32, 2.0 * PI).unwrap();
        let r = implicit_step(&unit(g), &Field::zeros(g), 0.1, Scheme::CrankNicolson, CgOptions::default())
            .unwrap();
        assert_eq!(r.cg_iters, 0);
        assert_eq!(r.u_next, Field::zeros(g));
    }

    #[test]
    fn divergence_is_reported() {
        let g = GridSpec::new(1, 64, 2.0 * PI).unwrap();
        let a = Field::from_fn(g, |x| 2.0 + x[0].sin());
        let one = Field::constant(g, 1.0);
        let p = OperatorData::new(a, one.clone(), one, 0.5, crate::operator::Floors { a0: 1.0, b0: 1.0, c0: 1.0 })
            .unwrap();
        let u = Field::from_fn(g, |x| (-(x[0] - 3.0).powi(2)).exp());
        let opts = CgOptions { rel_tol: 1e-12, max_iter: 1 };
        assert!(matches!(
            implicit_step(&p, &u, 0.5, Scheme::BackwardEuler, opts),
            Err(Error::CgDivergence { step: None, iterations: 1, .. })
        ));
        let mut cfg = RunConfig::new(1.0, 0.5, Scheme::BackwardEuler);
        cfg.cg_max_iter = 1;
        assert!(matches!(
            solve_ivp(&p, &u, &cfg),
            Err(Error::CgDivergence { step: Some(1), .. })
        ));
    }

    #[test]
    fn snapshots_and_trace_layout() {
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        let p = unit(g);
        let u0 = Field::from_fn(g, |x| x[0].cos());
        let cfg = RunConfig::new(1.0, 0.3, Scheme::BackwardEuler).with_stride(3);
        let sol = solve_ivp(&p, &u0, &cfg).unwrap();
        assert_eq!(sol.trace.len(), 5);
        assert_eq!(sol.dt, 0.25);
        let steps: Vec<usize> = sol.snapshots.iter().map(|s| s.step).collect();
        assert_eq!(steps, [0, 3, 4]);
        assert_eq!(*sol.trace.times.last().unwrap(), 1.0);
        assert_eq!(sol.trace.breakdowns[0].total, energy(&p, &u0).unwrap().total);
        assert_eq!(sol.trace.cg_iterations[0], 0);
        assert_eq!(sol.trace.ut_l2_sq[0], 0.0);
    }

    #[test]
    fn injected_bump_is_detected() {
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        let p = unit(g);
        let u0 = Field::from_fn(g, |x| x[0].cos());
        let sol = solve_ivp(&p, &u0, &RunConfig::new(1.0, 0.1, Scheme::BackwardEuler)).unwrap();
        let clean = verify_energy_monotonicity(&sol.trace);
        assert!(clean.monotone_l2 && clean.monotone_total);
        assert_eq!(clean.max_violation, 0.0);

        let mut bumped = sol.trace.clone();
        bumped.breakdowns[4].total = bumped.breakdowns[3].total + 0.25;
        let r = verify_energy_monotonicity(&bumped);
        assert!(r.monotone_l2 && !r.monotone_total);
        assert!((r.max_violation - 0.25).abs() < 1e-15);

        let mut single = sol.trace.clone();
        single.breakdowns.truncate(1);
        assert!(verify_energy_monotonicity(&single).monotone_total);
    }

    #[test]
    fn apriori_on_cosine() {
        let g = GridSpec::new(1, 32, 2.0 * PI).unwrap();
        let p = unit(g);
        let u0 = Field::from_fn(g, |x| x[0].cos());
        let sol = solve_ivp(&p, &u0, &RunConfig::new(0.5, 0.1, Scheme::BackwardEuler)).unwrap();
        let r = verify_apriori(&p, &sol, &u0).unwrap();
        assert!((r.lhs_max - 3.0 * PI).abs() < 1e-12);
        assert!((r.rhs - 48.0 * PI).abs() < 1e-10);
        assert!(r.satisfied);

        let z = Field::zeros(g);
        let sol = solve_ivp(&p, &z, &RunConfig::new(0.5, 0.1, Scheme::BackwardEuler)).unwrap();
        let r = verify_apriori(&p, &sol, &z).unwrap();
        assert_eq!((r.lhs_max, r.rhs, r.satisfied), (0.0, 0.0, true));
        assert!(sol.snapshots.iter().all(|s| s.field == z));

        let mut broken = sol.clone();
        broken.snapshots.clear();
        assert!(matches!(verify_apriori(&p, &broken, &z), Err(Error::TraceMismatch(_))));
    }
}
