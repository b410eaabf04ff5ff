use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{check_order, Field};

/// Largest admissible `d * n^d` for the double sum.
pub const GAGLIARDO_COST_LIMIT: usize = 1 << 16;

/// Relative size of `u` on the boundary shell below which `u` counts as compactly supported.
const SUPPORT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GagliardoEstimate {
    /// Double Riemann sum over pairs with `0 < |x - y| <= R`.
    pub value: f64,
    /// Contribution of pairs with `|x - y| > R` in the whole space,
    /// `2 ||u||^2 |S^{d-1}| R^{-2s} / (2s)`; exact when the support of `u`
    /// has diameter below `R`.
    pub tail: f64,
}

impl GagliardoEstimate {
    pub fn total(&self) -> f64 {
        self.value + self.tail
    }
}

/// Brute-force `[u]^2 = sum |u(x) - u(y)|^2 / |x - y|^{d+2s}` over grid pairs,
/// with minimum-image distances and the diagonal left out.
pub fn gagliardo_seminorm_bruteforce(u: &Field, s: f64, radius: f64) -> Result<GagliardoEstimate> {
    check_order(s)?;
    let grid = *u.grid();
    let d = grid.dimension;
    let n = grid.points;
    let cost = d * grid.len();
    if cost > GAGLIARDO_COST_LIMIT {
        return Err(Error::CostGuard {
            points: cost,
            limit: GAGLIARDO_COST_LIMIT,
        });
    }
    if !(radius > 0.0 && radius <= grid.length / 2.0) {
        return Err(Error::InvalidOperator(format!(
            "truncation radius {radius} must lie in (0, {}]",
            grid.length / 2.0
        )));
    }
    let max = u.sup_norm();
    let shell = (0..grid.len())
        .filter(|&i| grid.on_boundary_shell(i))
        .map(|i| u.values()[i].abs())
        .fold(0.0, f64::max);
    if shell >= SUPPORT_TOLERANCE * max && max > 0.0 {
        return Err(Error::SupportViolation { shell, max });
    }

    let h = grid.spacing();
    let half = (n / 2) as i64;
    let span: Vec<i64> = (-half..half).collect();
    let offsets: Vec<[i64; 2]> = if d == 1 {
        span.iter().map(|&i| [i, 0]).collect()
    } else {
        span.iter()
            .flat_map(|&i| span.iter().map(move |&j| [i, j]))
            .collect()
    };
    let exponent = d as f64 + 2.0 * s;
    let values = u.values();
    let partial: Vec<f64> = offsets
        .par_iter()
        .map(|off| {
            let dist = ((off[0] * off[0] + off[1] * off[1]) as f64).sqrt() * h;
            if dist == 0.0 || dist > radius * (1.0 + 1e-12) {
                return 0.0;
            }
            let mut acc = 0.0;
            for i in 0..grid.len() {
                let m = grid.multi_index(i);
                let j0 = (m[0] as i64 + off[0]).rem_euclid(n as i64) as usize;
                let j = if d == 1 {
                    j0
                } else {
                    let j1 = (m[1] as i64 + off[1]).rem_euclid(n as i64) as usize;
                    j0 * n + j1
                };
                let diff = values[i] - values[j];
                acc += diff * diff;
            }
            acc / dist.powf(exponent)
        })
        .collect();
    let cell = grid.cell_volume();
    let value = partial.iter().sum::<f64>() * cell * cell;

    let sphere = if d == 1 { 2.0 } else { 2.0 * PI };
    let tail = 2.0 * u.l2_norm_sq() * sphere * radius.powf(-2.0 * s) / (2.0 * s);
    Ok(GagliardoEstimate { value, tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    fn bump(g: GridSpec, c: f64, w: f64) -> Field {
        Field::from_fn(g, |x| {
            let r = (x[0] - c) / w;
            if r.abs() < 1.0 {
                (-1.0 / (1.0 - r * r)).exp()
            } else {
                0.0
            }
        })
    }

    #[test]
    fn zero_and_homogeneity() {
        let g = GridSpec::new(1, 64, 20.0).unwrap();
        let z = gagliardo_seminorm_bruteforce(&Field::zeros(g), 0.5, 10.0).unwrap();
        assert_eq!(z.total(), 0.0);
        let u = bump(g, 10.0, 3.0);
        let a = gagliardo_seminorm_bruteforce(&u, 0.5, 10.0).unwrap();
        let b = gagliardo_seminorm_bruteforce(&u.scale(2.0), 0.5, 10.0).unwrap();
        assert!((b.value / a.value - 4.0).abs() < 1e-12);
        assert!((b.tail / a.tail - 4.0).abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let big = GridSpec::new(2, 256, 1.0).unwrap();
        assert!(matches!(
            gagliardo_seminorm_bruteforce(&Field::zeros(big), 0.5, 0.5),
            Err(Error::CostGuard { .. })
        ));
        let g = GridSpec::new(1, 64, 20.0).unwrap();
        let wide = Field::from_fn(g, |x| (x[0] * 0.3).cos());
        assert!(matches!(
            gagliardo_seminorm_bruteforce(&wide, 0.5, 10.0),
            Err(Error::SupportViolation { .. })
        ));
        assert!(gagliardo_seminorm_bruteforce(&bump(g, 10.0, 3.0), 0.5, 11.0).is_err());
    }

    #[test]
    fn two_dimensional_sum_is_symmetric_in_axes() {
        let g = GridSpec::new(2, 32, 10.0).unwrap();
        let f = |x: f64, y: f64| {
            let r2 = ((x - 4.5) / 2.0).powi(2) + ((y - 5.5) / 3.0).powi(2);
            if r2 < 1.0 {
                (-1.0 / (1.0 - r2)).exp()
            } else {
                0.0
            }
        };
        let u = Field::from_fn(g, |x| f(x[0], x[1]));
        let v = Field::from_fn(g, |x| f(x[1], x[0]));
        let a = gagliardo_seminorm_bruteforce(&u, 0.4, 5.0).unwrap();
        let b = gagliardo_seminorm_bruteforce(&v, 0.4, 5.0).unwrap();
        assert!((a.value - b.value).abs() < 1e-12 * a.value);
        assert!(a.value > 0.0 && a.tail > 0.0);
    }
}
