use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

use super::field::Field;
use super::grid::GridSpec;

/// Imaginary residue tolerated by [`inverse_transform`], relative to the output scale.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Fourier coefficients of a real field, in FFT order along each axis.
///
/// The forward transform divides by `n^d`, so a coefficient is the average of
/// the field against the corresponding mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: GridSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if coefficients.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coefficients.len()
            )));
        }
        Ok(Self { grid, coefficients })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coefficients: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    /// Flat index of the coefficient for signed frequency vector `m`.
    pub fn index_of(&self, m: [i64; 2]) -> usize {
        let n = self.grid.points as i64;
        let wrap = |f: i64| f.rem_euclid(n) as usize;
        match self.grid.dimension {
            1 => wrap(m[0]),
            _ => wrap(m[0]) * self.grid.points + wrap(m[1]),
        }
    }

    pub fn at(&self, m: [i64; 2]) -> Complex64 {
        self.coefficients[self.index_of(m)]
    }

    fn mirror(&self, flat: usize) -> usize {
        let n = self.grid.points;
        let [i, j] = self.grid.multi_index(flat);
        let neg = |k: usize| (n - k) % n;
        match self.grid.dimension {
            1 => neg(i),
            _ => neg(i) * n + neg(j),
        }
    }

    /// Largest `|c(-m) - conj(c(m))|` relative to the largest coefficient.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.coefficients.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (0..self.coefficients.len())
            .map(|i| (self.coefficients[self.mirror(i)] - self.coefficients[i].conj()).norm())
            .fold(0.0, f64::max);
        worst / scale
    }

    /// Plancherel-side `L^2` norm: `(L^d sum |c|^2)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coefficients.iter().map(|c| c.norm_sqr()).sum();
        (s * self.grid.volume()).sqrt()
    }
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// FFT plans keyed by `(length, inverse)`.
type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("fft plan cache poisoned");
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut p = planner().lock().expect("fft planner poisoned");
            if inverse {
                p.plan_fft_inverse(n)
            } else {
                p.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Unnormalised in-place transform of an `n^d` (or `m^d` for padded grids) array.
pub(crate) fn fft_in_place(dimension: usize, n: usize, data: &mut [Complex64], inverse: bool) {
    let fft = plan(n, inverse);
    match dimension {
        1 => fft.process(data),
        _ => {
            // rows (axis 1 is contiguous)
            fft.process(data);
            let mut column = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..n {
                    column[i] = data[i * n + j];
                }
                fft.process(&mut column);
                for i in 0..n {
                    data[i * n + j] = column[i];
                }
            }
        }
    }
}

/// Forward transform of raw samples, normalised by `n^d`.
pub(crate) fn forward_raw(grid: &GridSpec, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(grid.dimension, grid.points, &mut data, false);
    let scale = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    data
}

/// Inverse transform returning the real part and the largest imaginary residue.
pub(crate) fn inverse_raw(grid: &GridSpec, mut data: Vec<Complex64>) -> (Vec<f64>, f64, f64) {
    fft_in_place(grid.dimension, grid.points, &mut data, true);
    let mut residue = 0.0_f64;
    let mut scale = 0.0_f64;
    let values = data
        .iter()
        .map(|c| {
            residue = residue.max(c.im.abs());
            scale = scale.max(c.norm());
            c.re
        })
        .collect();
    (values, residue, scale)
}

/// Inverse transform for spectra known to be conjugate symmetric by construction.
pub(crate) fn inverse_real(grid: &GridSpec, data: Vec<Complex64>) -> Vec<f64> {
    inverse_raw(grid, data).0
}

pub fn forward_transform(u: &Field) -> Spectrum {
    Spectrum {
        grid: *u.grid(),
        coefficients: forward_raw(u.grid(), u.values()),
    }
}

pub fn inverse_transform(spectrum: &Spectrum) -> Result<Field> {
    let grid = spectrum.grid;
    let (values, residue, scale) = inverse_raw(&grid, spectrum.coefficients.clone());
    if residue > SYMMETRY_TOLERANCE * scale {
        return Err(Error::SymmetryViolation { residue, scale });
    }
    Ok(Field::from_raw(grid, values))
}
