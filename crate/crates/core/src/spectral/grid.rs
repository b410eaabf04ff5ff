use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `[0, length)^dimension`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dimension: usize,
    pub points: usize,
    pub length: f64,
}

/// Wavevector attached to one Fourier coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveVector {
    /// Physical wavenumbers `2 pi m / length` per axis (unused axes are 0).
    pub k: [f64; 2],
    /// Whether the axis frequency is the unpaired Nyquist frequency `n/2`.
    pub nyquist: [bool; 2],
}

impl WaveVector {
    pub fn norm(&self) -> f64 {
        self.k[0].hypot(self.k[1])
    }

    /// Wavenumber used by odd-order derivatives. The Nyquist mode of a real
    /// field has no real-valued derivative on the grid, so it is dropped.
    pub fn derivative_k(&self, axis: usize) -> f64 {
        if self.nyquist[axis] {
            0.0
        } else {
            self.k[axis]
        }
    }

    /// Symbol of `-div grad` as realised by the spectral gradient/divergence pair.
    pub fn local_symbol(&self) -> f64 {
        let kx = self.derivative_k(0);
        let ky = self.derivative_k(1);
        kx * kx + ky * ky
    }

    /// `|k|^p` with the convention `|0|^p = 0`.
    pub fn abs_power(&self, p: f64) -> f64 {
        let r = self.norm();
        if r == 0.0 {
            0.0
        } else {
            r.powf(p)
        }
    }
}

impl GridSpec {
    pub fn new(dimension: usize, points: usize, length: f64) -> Result<Self> {
        let grid = Self {
            dimension,
            points,
            length,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dimension) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {}",
                self.dimension
            )));
        }
        if self.points < 16 || !self.points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 16, got {}",
                self.points
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {}",
                self.length
            )));
        }
        Ok(())
    }

    /// Total number of grid points `n^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    /// Box volume `L^d`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dimension as i32)
    }

    /// Per-axis integer indices of a flat (row-major) index.
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        match self.dimension {
            1 => [flat, 0],
            _ => [flat / self.points, flat % self.points],
        }
    }

    /// Coordinates of a grid point; unused axes are 0.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let h = self.spacing();
        let [i, j] = self.multi_index(flat);
        match self.dimension {
            1 => [i as f64 * h, 0.0],
            _ => [i as f64 * h, j as f64 * h],
        }
    }

    /// Signed frequency of an axis index in FFT order: `0..=n/2, -n/2+1..-1`.
    pub fn signed_frequency(&self, index: usize) -> i64 {
        let n = self.points as i64;
        let i = index as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn wave_vector(&self, flat: usize) -> WaveVector {
        let [i, j] = self.multi_index(flat);
        let scale = 2.0 * PI / self.length;
        let half = self.points / 2;
        let mut wave = WaveVector {
            k: [self.signed_frequency(i) as f64 * scale, 0.0],
            nyquist: [i == half, false],
        };
        if self.dimension == 2 {
            wave.k[1] = self.signed_frequency(j) as f64 * scale;
            wave.nyquist[1] = j == half;
        }
        wave
    }

    /// Largest represented wavenumber magnitude along one axis.
    pub fn max_wavenumber(&self) -> f64 {
        PI * self.points as f64 / self.length
    }

    /// Minimum-image displacement of a coordinate difference on one axis.
    pub fn min_image(&self, dx: f64) -> f64 {
        dx - self.length * (dx / self.length).round()
    }

    /// Minimum-image displacement vector from `origin` to grid point `flat`.
    pub fn displacement(&self, flat: usize, origin: [f64; 2]) -> [f64; 2] {
        let p = self.point(flat);
        let mut d = [self.min_image(p[0] - origin[0]), 0.0];
        if self.dimension == 2 {
            d[1] = self.min_image(p[1] - origin[1]);
        }
        d
    }

    /// Whether a flat index lies on the outermost layer of the fundamental cell.
    pub fn on_boundary_shell(&self, flat: usize) -> bool {
        let last = self.points - 1;
        let [i, j] = self.multi_index(flat);
        let edge = |k: usize| k == 0 || k == last;
        match self.dimension {
            1 => edge(i),
            _ => edge(i) || edge(j),
        }
    }
}
