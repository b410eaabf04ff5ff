use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    BackwardEuler,
    CrankNicolson,
}

impl Scheme {
    /// Implicit weight `theta` in `(I + theta dt L) u_{n+1} = (I - (1-theta) dt L) u_n`.
    pub fn theta(&self) -> f64 {
        match self {
            Scheme::BackwardEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::BackwardEuler => "backward_euler",
            Scheme::CrankNicolson => "crank_nicolson",
        }
    }
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    500
}

fn default_stride() -> usize {
    1
}

fn default_scheme() -> Scheme {
    Scheme::BackwardEuler
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub final_time: f64,
    pub dt: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_tol")]
    pub cg_rel_tol: f64,
    #[serde(default = "default_max_iter")]
    pub cg_max_iter: usize,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

impl RunConfig {
    pub fn new(final_time: f64, dt: f64, scheme: Scheme) -> Self {
        Self {
            final_time,
            dt,
            scheme,
            cg_rel_tol: default_tol(),
            cg_max_iter: default_max_iter(),
            snapshot_stride: default_stride(),
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.cg_rel_tol = tol;
        self
    }

    /// Every violated constraint, as `(field, message)` pairs.
    pub fn problems(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            out.push(("final_time", format!("must be positive, got {}", self.final_time)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push(("dt", format!("must be positive, got {}", self.dt)));
        } else if self.dt > self.final_time {
            out.push(("dt", format!("{} exceeds final_time {}", self.dt, self.final_time)));
        }
        if !(self.cg_rel_tol > 0.0 && self.cg_rel_tol <= 1e-4) {
            out.push(("cg_rel_tol", format!("must lie in (0, 1e-4], got {}", self.cg_rel_tol)));
        }
        if self.cg_max_iter == 0 {
            out.push(("cg_max_iter", "must be at least 1".into()));
        }
        if self.snapshot_stride == 0 {
            out.push(("snapshot_stride", "must be at least 1".into()));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.problems().first() {
            None => Ok(()),
            Some((field, msg)) => Err(Error::InvalidRun(format!("{field}: {msg}"))),
        }
    }

    /// Number of uniform steps; the step is shortened so the last one lands on `final_time`.
    pub fn steps(&self) -> usize {
        ((self.final_time / self.dt - 1e-9).ceil() as usize).max(1)
    }

    pub fn effective_dt(&self) -> f64 {
        self.final_time / self.steps() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_lands_on_final_time() {
        let c = RunConfig::new(1.0, 1e-3, Scheme::BackwardEuler);
        assert_eq!(c.steps(), 1000);
        let c = RunConfig::new(0.5, 0.3, Scheme::BackwardEuler);
        assert_eq!(c.steps(), 2);
        assert_eq!(c.effective_dt(), 0.25);
    }

    #[test]
    fn collects_every_problem() {
        let mut c = RunConfig::new(1.0, 2.0, Scheme::CrankNicolson);
        c.cg_rel_tol = 1e-3;
        c.snapshot_stride = 0;
        let fields: Vec<_> = c.problems().into_iter().map(|(f, _)| f).collect();
        assert_eq!(fields, ["dt", "cg_rel_tol", "snapshot_stride"]);
        assert!(c.validate().is_err());
        assert!(RunConfig::new(1.0, 0.1, Scheme::BackwardEuler).validate().is_ok());
    }
}
