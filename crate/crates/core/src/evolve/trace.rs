use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::EnergyBreakdown;

pub const TRACE_CSV_HEADER: &str =
    "time,l2_sq,grad_w_sq,frac_w_sq,mass_w_sq,total,ut_l2_sq,cg_iterations";

/// Per-step energies of one solve. Entry 0 is the initial state.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub breakdowns: Vec<EnergyBreakdown>,
    /// `||(u_{n+1} - u_n)/dt||^2` for the step ending at this entry; 0 at `t = 0`.
    pub ut_l2_sq: Vec<f64>,
    pub cg_iterations: Vec<usize>,
}

impl EnergyTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, time: f64, breakdown: EnergyBreakdown, ut_l2_sq: f64, cg_iterations: usize) {
        self.times.push(time);
        self.breakdowns.push(breakdown);
        self.ut_l2_sq.push(ut_l2_sq);
        self.cg_iterations.push(cg_iterations);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if self.breakdowns.len() != n || self.ut_l2_sq.len() != n || self.cg_iterations.len() != n {
            return Err(Error::TraceMismatch("trace columns differ in length".into()));
        }
        if n > 0 && self.times[0] != 0.0 {
            return Err(Error::TraceMismatch("trace must start at t = 0".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::TraceMismatch("times must be strictly increasing".into()));
        }
        Ok(())
    }

    /// `dt sum ||(u_{n+1} - u_n)/dt||^2` over the recorded steps.
    pub fn ut_integral(&self) -> f64 {
        self.times
            .windows(2)
            .zip(&self.ut_l2_sq[1..])
            .map(|(w, v)| (w[1] - w[0]) * v)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(160 * (self.len() + 1));
        out.push_str(TRACE_CSV_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            let b = &self.breakdowns[i];
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                self.times[i],
                b.l2_sq,
                b.grad_w_sq,
                b.frac_w_sq,
                b.mass_w_sq,
                b.total,
                self.ut_l2_sq[i],
                self.cg_iterations[i]
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(TRACE_CSV_HEADER) {
            return Err(Error::TraceMismatch("unexpected CSV header".into()));
        }
        let mut trace = EnergyTrace::default();
        for (row, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 8 {
                return Err(Error::TraceMismatch(format!("row {row}: expected 8 columns")));
            }
            let num = |i: usize| {
                cols[i]
                    .parse::<f64>()
                    .map_err(|e| Error::TraceMismatch(format!("row {row}, column {i}: {e}")))
            };
            let iterations = cols[7]
                .parse::<usize>()
                .map_err(|e| Error::TraceMismatch(format!("row {row}, column 7: {e}")))?;
            trace.push(
                num(0)?,
                EnergyBreakdown {
                    l2_sq: num(1)?,
                    grad_w_sq: num(2)?,
                    frac_w_sq: num(3)?,
                    mass_w_sq: num(4)?,
                    total: num(5)?,
                },
                num(6)?,
                iterations,
            );
        }
        trace.validate()?;
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = EnergyTrace::default();
        let b = |x: f64| EnergyBreakdown {
            l2_sq: x,
            grad_w_sq: x / 3.0,
            frac_w_sq: x * std::f64::consts::PI,
            mass_w_sq: 1e-300,
            total: x + 0.1,
        };
        t.push(0.0, b(1.0), 0.0, 0);
        t.push(0.1, b(0.7), 2.5e-7, 12);
        let csv = t.to_csv();
        assert!(csv.starts_with("time,l2_sq,"));
        assert_eq!(EnergyTrace::from_csv(&csv).unwrap(), t);
        assert!(EnergyTrace::from_csv("bad\n").is_err());
    }
}
