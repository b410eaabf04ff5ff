use crate::error::{Error, Result};

use super::grid::GridSpec;

/// Real function sampled on a periodic grid (row-major over axes).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!(
                "non-finite value {} at index {i}",
                values[i]
            )));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self::from_raw(grid, vec![value; grid.len()])
    }

    /// Samples `f` at every grid point. Coordinates of unused axes are 0.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::from_raw(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.ensure_same_grid(other)?;
        Ok(self.zip_unchecked(other, f))
    }

    pub(crate) fn zip_unchecked(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field::from_raw(self.grid, values)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Field {
        self.map(|v| v * factor)
    }

    pub fn shift(&self, offset: f64) -> Field {
        self.map(|v| v + offset)
    }

    /// Pointwise (collocation) product.
    pub fn hadamard(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Discrete `L^2` inner product `h^d sum u v`.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Field) -> f64 {
        dot(&self.values, &other.values) * self.grid.cell_volume()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        dot(&self.values, &self.values) * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete integral `h^d sum u`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
