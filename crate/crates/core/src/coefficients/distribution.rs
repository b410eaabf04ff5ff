use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{forward_raw, inverse_real, Field, GridSpec};

use super::expr::Expr;
use super::mollifier::{sample_mollifier, MollifierSpec};

/// Slack allowed below the floor when checking regularised coefficients.
pub const FLOOR_SLACK: f64 = 1e-9;

/// One term of a compactly supported distribution.
///
/// `DiracDerivative { location, weight, order, axis }` is the functional
/// `phi -> weight * d^order phi / dx_axis^order (location)`, so its
/// regularisation is `weight * (-1)^order * d^order psi_w(x - location)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Term {
    Smooth {
        expr: Expr,
    },
    Dirac {
        location: Vec<f64>,
        weight: f64,
    },
    DiracDerivative {
        location: Vec<f64>,
        weight: f64,
        order: u8,
        #[serde(default)]
        axis: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    #[serde(default)]
    pub terms: Vec<Term>,
    /// Declared sign; must be `true` for the singular part of a coefficient.
    #[serde(default)]
    pub nonnegative: bool,
}

impl DistributionSpec {
    pub fn empty() -> Self {
        Self {
            terms: Vec::new(),
            nonnegative: true,
        }
    }

    pub fn smooth(expr: Expr) -> Self {
        Self {
            terms: vec![Term::Smooth { expr }],
            nonnegative: false,
        }
    }

    pub fn dirac(location: Vec<f64>, weight: f64) -> Self {
        Self {
            terms: vec![Term::Dirac { location, weight }],
            nonnegative: true,
        }
    }

    pub fn dirac_derivative(location: Vec<f64>, weight: f64, order: u8) -> Self {
        Self {
            terms: vec![Term::DiracDerivative {
                location,
                weight,
                order,
                axis: 0,
            }],
            nonnegative: false,
        }
    }

    pub fn with_nonnegative(mut self, flag: bool) -> Self {
        self.nonnegative = flag;
        self
    }

    /// Term-wise union (sum of distributions).
    pub fn plus(&self, other: &DistributionSpec) -> DistributionSpec {
        DistributionSpec {
            terms: self.terms.iter().chain(&other.terms).cloned().collect(),
            nonnegative: self.nonnegative && other.nonnegative,
        }
    }

    pub fn has_singular_terms(&self) -> bool {
        self.terms.iter().any(|t| !matches!(t, Term::Smooth { .. }))
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let d = grid.dimension;
        let check_location = |loc: &[f64]| -> Result<()> {
            if loc.len() != d {
                return Err(Error::InvalidDistribution(format!(
                    "location has {} coordinates, expected {d}",
                    loc.len()
                )));
            }
            if loc.iter().any(|&x| !(x > 0.0 && x < grid.length)) {
                return Err(Error::InvalidDistribution(format!(
                    "location {loc:?} is not strictly inside (0, {})^{d}",
                    grid.length
                )));
            }
            Ok(())
        };
        for term in &self.terms {
            match term {
                Term::Smooth { expr } => expr.validate(d)?,
                Term::Dirac { location, weight } => {
                    check_location(location)?;
                    if !(*weight >= 0.0 && weight.is_finite()) {
                        return Err(Error::InvalidDistribution(format!(
                            "dirac weight must be nonnegative, got {weight}"
                        )));
                    }
                }
                Term::DiracDerivative {
                    location,
                    weight,
                    order,
                    axis,
                } => {
                    check_location(location)?;
                    if !weight.is_finite() {
                        return Err(Error::InvalidDistribution(format!("weight {weight}")));
                    }
                    if !(1..=2).contains(order) {
                        return Err(Error::InvalidDistribution(format!(
                            "derivative order must be 1 or 2, got {order}"
                        )));
                    }
                    if *axis >= d {
                        return Err(Error::InvalidDistribution(format!(
                            "derivative axis {axis} out of range"
                        )));
                    }
                    if self.nonnegative && *weight != 0.0 {
                        return Err(Error::InvalidDistribution(
                            "a distribution with dirac derivatives cannot be declared nonnegative"
                                .into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Samples the smooth part without mollification (only meaningful for
    /// distributions without singular terms).
    pub fn sample_smooth(&self, grid: &GridSpec) -> Field {
        let mut acc = vec![0.0; grid.len()];
        for term in &self.terms {
            if let Term::Smooth { expr } = term {
                for (i, a) in acc.iter_mut().enumerate() {
                    *a += expr.eval(grid.point(i), grid);
                }
            }
        }
        Field::from_raw(*grid, acc)
    }
}

/// A coefficient `floor + singular`, with `singular >= 0` in the sense of distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub floor: f64,
    #[serde(default = "DistributionSpec::empty")]
    pub singular: DistributionSpec,
}

impl CoefficientSpec {
    pub fn constant(floor: f64) -> Self {
        Self {
            floor,
            singular: DistributionSpec::empty(),
        }
    }

    pub fn new(floor: f64, singular: DistributionSpec) -> Self {
        Self { floor, singular }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !(self.floor > 0.0 && self.floor.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "coefficient floor must be positive, got {}",
                self.floor
            )));
        }
        if !self.singular.nonnegative {
            return Err(Error::InvalidDistribution(
                "the singular part of a coefficient must be declared nonnegative".into(),
            ));
        }
        self.singular.validate(grid)
    }

    /// `floor + singular` sampled without mollification.
    pub fn sample_unmollified(&self, grid: &GridSpec) -> Result<Field> {
        if self.singular.has_singular_terms() {
            return Err(Error::NotRegularData(
                "coefficient has dirac terms and cannot be sampled directly".into(),
            ));
        }
        Ok(self.singular.sample_smooth(grid).shift(self.floor))
    }
}

/// Circular convolution `h^d sum_j f_j k_{i-j}` via the FFT.
pub(crate) fn convolve(f: &Field, kernel: &Field) -> Field {
    let grid = *f.grid();
    let vol = grid.volume();
    let fh = forward_raw(&grid, f.values());
    let kh = forward_raw(&grid, kernel.values());
    let prod: Vec<Complex64> = fh.iter().zip(&kh).map(|(a, b)| a * b * vol).collect();
    Field::from_raw(grid, inverse_real(&grid, prod))
}

/// Regularises `dist` by convolution with `psi_{w(eps)}`.
///
/// Smooth terms are convolved with the sampled kernel on the grid; point
/// masses and their derivatives are replaced by translated (differentiated)
/// closed-form kernels.
pub fn regularize(
    dist: &DistributionSpec,
    m: &MollifierSpec,
    eps: f64,
    grid: &GridSpec,
) -> Result<Field> {
    let omega = m.check_resolved(eps, grid)?;
    dist.validate(grid)?;
    let d = grid.dimension;

    let mut out = vec![0.0; grid.len()];
    let smooth: Vec<&Expr> = dist
        .terms
        .iter()
        .filter_map(|t| match t {
            Term::Smooth { expr } => Some(expr),
            _ => None,
        })
        .collect();
    if !smooth.is_empty() {
        let f = Field::from_fn(*grid, |x| smooth.iter().map(|e| e.eval(x, grid)).sum());
        let kernel = sample_mollifier(m, eps, grid)?;
        let conv = convolve(&f, &kernel);
        out.iter_mut().zip(conv.values()).for_each(|(o, c)| *o += c);
    }

    for term in &dist.terms {
        let (location, weight, order, axis) = match term {
            Term::Smooth { .. } => continue,
            Term::Dirac { location, weight } => (location, *weight, 0u8, 0usize),
            Term::DiracDerivative {
                location,
                weight,
                order,
                axis,
            } => (location, *weight, *order, *axis),
        };
        let centre = [location[0], location.get(1).copied().unwrap_or(0.0)];
        let unit = m.sample_raw(eps, grid, centre)?;
        // discrete renormalisation of the translated kernel, shared by its derivatives
        let mass_fix = 1.0 / unit.integral();
        if order == 0 {
            out.iter_mut()
                .zip(unit.values())
                .for_each(|(o, k)| *o += weight * k * mass_fix);
            continue;
        }
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        let scale = omega.powi(-(d as i32) - order as i32);
        for (i, o) in out.iter_mut().enumerate() {
            let dx = grid.displacement(i, centre);
            let y = [dx[0] / omega, dx[1] / omega];
            *o += weight * sign * scale * mass_fix * m.profile.partial(y, d, axis, order)?;
        }
    }
    Ok(Field::from_raw(*grid, out))
}

/// `floor + regularize(singular)`, checked against the floor.
pub fn regularize_coefficient(
    coeff: &CoefficientSpec,
    m: &MollifierSpec,
    eps: f64,
    grid: &GridSpec,
) -> Result<Field> {
    coeff.validate(grid)?;
    let field = regularize(&coeff.singular, m, eps, grid)?.shift(coeff.floor);
    let min = field.min();
    if min < coeff.floor - FLOOR_SLACK {
        return Err(Error::PositivityViolation {
            min,
            floor: coeff.floor,
        });
    }
    Ok(field)
}
