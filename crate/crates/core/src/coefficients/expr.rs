use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Field, GridSpec};

fn one() -> f64 {
    1.0
}

/// Closed-form smooth functions on the torus.
///
/// Trigonometric terms use integer mode numbers so they are periodic on the
/// box: `cos { axis, mode }` is `amplitude * cos(2 pi mode x_axis / L)`.
/// Gaussians use the minimum-image distance to their centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expr {
    Constant {
        value: f64,
    },
    Sin {
        #[serde(default)]
        axis: usize,
        mode: i64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Cos {
        #[serde(default)]
        axis: usize,
        mode: i64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Gaussian {
        center: Vec<f64>,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Sum {
        terms: Vec<Expr>,
    },
    Product {
        factors: Vec<Expr>,
    },
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Constant { value }
    }

    pub fn cos(mode: i64, amplitude: f64) -> Self {
        Expr::Cos {
            axis: 0,
            mode,
            amplitude,
        }
    }

    pub fn sin(mode: i64, amplitude: f64) -> Self {
        Expr::Sin {
            axis: 0,
            mode,
            amplitude,
        }
    }

    pub fn gaussian(center: Vec<f64>, width: f64, amplitude: f64) -> Self {
        Expr::Gaussian {
            center,
            width,
            amplitude,
        }
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        Expr::Sum { terms }
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        match self {
            Expr::Constant { value } if !value.is_finite() => bad(format!("constant {value}")),
            Expr::Sin { axis, amplitude, .. } | Expr::Cos { axis, amplitude, .. } => {
                if *axis >= dimension {
                    bad(format!("axis {axis} out of range for dimension {dimension}"))
                } else if !amplitude.is_finite() {
                    bad(format!("amplitude {amplitude}"))
                } else {
                    Ok(())
                }
            }
            Expr::Gaussian {
                center,
                width,
                amplitude,
            } => {
                if center.len() != dimension {
                    bad(format!(
                        "gaussian centre has {} coordinates, expected {dimension}",
                        center.len()
                    ))
                } else if !(*width > 0.0 && width.is_finite()) {
                    bad(format!("gaussian width {width}"))
                } else if !amplitude.is_finite() || center.iter().any(|c| !c.is_finite()) {
                    bad("gaussian parameters must be finite".into())
                } else {
                    Ok(())
                }
            }
            Expr::Sum { terms } => terms.iter().try_for_each(|t| t.validate(dimension)),
            Expr::Product { factors } => factors.iter().try_for_each(|t| t.validate(dimension)),
            Expr::Constant { .. } => Ok(()),
        }
    }

    pub fn eval(&self, x: [f64; 2], grid: &GridSpec) -> f64 {
        let l = grid.length;
        match self {
            Expr::Constant { value } => *value,
            Expr::Sin {
                axis,
                mode,
                amplitude,
            } => amplitude * (2.0 * PI * *mode as f64 * x[*axis] / l).sin(),
            Expr::Cos {
                axis,
                mode,
                amplitude,
            } => amplitude * (2.0 * PI * *mode as f64 * x[*axis] / l).cos(),
            Expr::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let r2: f64 = center
                    .iter()
                    .enumerate()
                    .map(|(axis, c)| grid.min_image(x[axis] - c).powi(2))
                    .sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            Expr::Sum { terms } => terms.iter().map(|t| t.eval(x, grid)).sum(),
            Expr::Product { factors } => factors.iter().map(|t| t.eval(x, grid)).product(),
        }
    }

    pub fn sample(&self, grid: &GridSpec) -> Field {
        Field::from_fn(*grid, |x| self.eval(x, grid))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_composites() {
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        let e = Expr::sum(vec![
            Expr::constant(2.0),
            Expr::Product {
                factors: vec![Expr::sin(1, 1.0), Expr::cos(1, 2.0)],
            },
        ]);
        let x: f64 = 0.7;
        let want = 2.0 + x.sin() * 2.0 * x.cos();
        assert!((e.eval([x, 0.0], &g) - want).abs() < 1e-14);
    }

    #[test]
    fn gaussian_uses_minimum_image() {
        let g = GridSpec::new(1, 16, 10.0).unwrap();
        let e = Expr::gaussian(vec![0.5], 1.0, 1.0);
        let near = e.eval([9.5, 0.0], &g);
        assert!((near - (-0.5_f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn validation_catches_bad_axes_and_widths() {
        assert!(Expr::Cos { axis: 1, mode: 1, amplitude: 1.0 }.validate(1).is_err());
        assert!(Expr::gaussian(vec![1.0], 0.0, 1.0).validate(1).is_err());
        assert!(Expr::gaussian(vec![1.0], 1.0, 1.0).validate(2).is_err());
        assert!(Expr::gaussian(vec![1.0, 2.0], 1.0, 1.0).validate(2).is_ok());
    }
}
