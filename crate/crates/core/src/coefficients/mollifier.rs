use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Field, GridSpec};

/// Standard deviation of the truncated Gaussian in reference units; the
/// profile is cut off at four standard deviations, i.e. at radius 1.
const GAUSSIAN_SIGMA: f64 = 0.25;

/// Reference kernel shape. Every profile is radial and supported in the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `exp(-1/(1-|x|^2))` on `|x| < 1`.
    Bump,
    /// `(1-|x|)_+`.
    Hat,
    /// `exp(-|x|^2/(2 sigma^2))` with `sigma = 1/4`, truncated at `|x| = 1`.
    TruncatedGaussian,
}

impl Profile {
    /// Unnormalised profile as a function of `q = |x|^2`.
    fn raw(&self, q: f64) -> f64 {
        if q >= 1.0 {
            return 0.0;
        }
        match self {
            Profile::Bump => (-1.0 / (1.0 - q)).exp(),
            Profile::Hat => 1.0 - q.sqrt(),
            Profile::TruncatedGaussian => (-q / (2.0 * GAUSSIAN_SIGMA * GAUSSIAN_SIGMA)).exp(),
        }
    }

    /// First and second derivatives of `raw` in `q` (smooth profiles only).
    fn raw_q_derivatives(&self, q: f64) -> (f64, f64) {
        if q >= 1.0 {
            return (0.0, 0.0);
        }
        match self {
            Profile::Bump => {
                let f = self.raw(q);
                let t = 1.0 / (1.0 - q);
                (-f * t * t, f * (t.powi(4) - 2.0 * t.powi(3)))
            }
            Profile::TruncatedGaussian => {
                let f = self.raw(q);
                let a = 1.0 / (2.0 * GAUSSIAN_SIGMA * GAUSSIAN_SIGMA);
                (-a * f, a * a * f)
            }
            Profile::Hat => unreachable!("hat profile has no q-derivatives"),
        }
    }

    /// `int_{R^d} raw(|x|^2) dx`, by composite Simpson quadrature in the radius.
    pub fn normalization(&self, dimension: usize) -> f64 {
        static CACHE: OnceLock<[[f64; 2]; 3]> = OnceLock::new();
        let table = CACHE.get_or_init(|| {
            let mut t = [[0.0; 2]; 3];
            for (pi, p) in [Profile::Bump, Profile::Hat, Profile::TruncatedGaussian]
                .iter()
                .enumerate()
            {
                t[pi][0] = 2.0 * simpson(|r| p.raw(r * r), 0.0, 1.0, 40_000);
                t[pi][1] =
                    2.0 * std::f64::consts::PI * simpson(|r| r * p.raw(r * r), 0.0, 1.0, 40_000);
            }
            t[1] = [1.0, std::f64::consts::PI / 3.0];
            t
        });
        let row = match self {
            Profile::Bump => 0,
            Profile::Hat => 1,
            Profile::TruncatedGaussian => 2,
        };
        table[row][dimension - 1]
    }

    /// Normalised reference kernel `psi(x)`.
    pub fn value(&self, x: [f64; 2], dimension: usize) -> f64 {
        self.raw(x[0] * x[0] + x[1] * x[1]) / self.normalization(dimension)
    }

    /// `sup psi = psi(0)`.
    pub fn peak(&self, dimension: usize) -> f64 {
        self.value([0.0, 0.0], dimension)
    }

    /// `d^order psi / dx_axis^order` of the normalised reference kernel.
    pub fn partial(&self, x: [f64; 2], dimension: usize, axis: usize, order: u8) -> Result<f64> {
        let z = self.normalization(dimension);
        let q = x[0] * x[0] + x[1] * x[1];
        let xa = x[axis];
        let value = match (self, order) {
            (_, 0) => self.raw(q),
            (Profile::Hat, 1) => {
                let r = q.sqrt();
                if r >= 1.0 || r == 0.0 {
                    0.0
                } else {
                    -xa / r
                }
            }
            (Profile::Hat, _) => {
                return Err(Error::InvalidMollifier(
                    "hat profile has no second derivative; use bump or truncated_gaussian".into(),
                ))
            }
            (_, 1) => 2.0 * xa * self.raw_q_derivatives(q).0,
            (_, 2) => {
                let (d1, d2) = self.raw_q_derivatives(q);
                2.0 * d1 + 4.0 * xa * xa * d2
            }
            _ => {
                return Err(Error::InvalidDistribution(format!(
                    "derivative order {order} not supported (max 2)"
                )))
            }
        };
        Ok(value / z)
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn default_power() -> f64 {
    1.0
}

/// A mollifier family `psi_w(x) = w^{-d} psi(x / w)` with scale law `w(eps) = eps^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierSpec {
    pub profile: Profile,
    #[serde(default = "default_power")]
    pub scale_power: f64,
}

impl Default for MollifierSpec {
    fn default() -> Self {
        Self {
            profile: Profile::Bump,
            scale_power: 1.0,
        }
    }
}

impl MollifierSpec {
    pub fn new(profile: Profile, scale_power: f64) -> Result<Self> {
        let m = Self {
            profile,
            scale_power,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale_power > 0.0 && self.scale_power.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidMollifier(format!(
                "scale power must be positive, got {}",
                self.scale_power
            )))
        }
    }

    /// Regularisation scale `w(eps) = eps^p`.
    pub fn omega(&self, eps: f64) -> f64 {
        eps.powf(self.scale_power)
    }

    /// Checks that the kernel at scale `eps` is resolved by and fits in the grid.
    /// Returns the scale `w(eps)`.
    pub fn check_resolved(&self, eps: f64, grid: &GridSpec) -> Result<f64> {
        self.validate()?;
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidMollifier(format!("epsilon {eps} outside (0, 1]")));
        }
        let omega = self.omega(eps);
        let min = 2.0 * grid.spacing();
        if omega < min {
            return Err(Error::UnresolvedKernel { width: omega, min });
        }
        let half_box = grid.length / 2.0;
        if omega >= half_box {
            return Err(Error::KernelTooWide {
                radius: omega,
                half_box,
            });
        }
        Ok(omega)
    }

    /// `psi_w(x - centre)` sampled on the grid without renormalisation.
    pub fn sample_raw(&self, eps: f64, grid: &GridSpec, centre: [f64; 2]) -> Result<Field> {
        let omega = self.check_resolved(eps, grid)?;
        let d = grid.dimension;
        let scale = omega.powi(-(d as i32));
        let values = (0..grid.len())
            .map(|i| {
                let dx = grid.displacement(i, centre);
                scale * self.profile.value([dx[0] / omega, dx[1] / omega], d)
            })
            .collect();
        Ok(Field::from_raw(*grid, values))
    }
}

/// Samples `psi_{w(eps)}` centred at the origin and rescales it to unit discrete mass.
pub fn sample_mollifier(m: &MollifierSpec, eps: f64, grid: &GridSpec) -> Result<Field> {
    let raw = m.sample_raw(eps, grid, [0.0, 0.0])?;
    let mass = raw.integral();
    Ok(raw.scale(1.0 / mass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_kernels_have_unit_mass() {
        for p in [Profile::Bump, Profile::Hat, Profile::TruncatedGaussian] {
            for d in [1, 2] {
                let z = p.normalization(d);
                assert!(z > 0.0);
            }
        }
        assert!((Profile::Hat.normalization(1) - 1.0).abs() < 1e-9);
        assert!((Profile::Hat.normalization(2) - std::f64::consts::PI / 3.0).abs() < 1e-9);
        // int_{-1}^{1} exp(-1/(1-x^2)) dx
        assert!((Profile::Bump.normalization(1) - 0.443_993_816_168_079_4).abs() < 1e-10);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-5;
        for p in [Profile::Bump, Profile::TruncatedGaussian] {
            for d in [1, 2] {
                let x = [0.31, if d == 2 { -0.22 } else { 0.0 }];
                let fd1 = (p.value([x[0] + h, x[1]], d) - p.value([x[0] - h, x[1]], d)) / (2.0 * h);
                let fd2 = (p.value([x[0] + h, x[1]], d) - 2.0 * p.value(x, d)
                    + p.value([x[0] - h, x[1]], d))
                    / (h * h);
                let a1 = p.partial(x, d, 0, 1).unwrap();
                let a2 = p.partial(x, d, 0, 2).unwrap();
                assert!((fd1 - a1).abs() < 1e-6 * a1.abs().max(1.0), "{p:?} d={d}");
                assert!((fd2 - a2).abs() < 1e-4 * a2.abs().max(1.0), "{p:?} d={d}");
            }
        }
        assert!(Profile::Hat.partial([0.3, 0.0], 1, 0, 2).is_err());
        assert_eq!(Profile::Hat.partial([0.3, 0.0], 1, 0, 1).unwrap(), -1.0);
    }

    #[test]
    fn kernel_guards() {
        let g = GridSpec::new(1, 64, 1.0).unwrap();
        let m = MollifierSpec::default();
        assert!(matches!(
            sample_mollifier(&m, 0.01, &g),
            Err(Error::UnresolvedKernel { .. })
        ));
        assert!(matches!(
            sample_mollifier(&m, 0.6, &g),
            Err(Error::KernelTooWide { .. })
        ));
        assert!(sample_mollifier(&m, 0.1, &g).is_ok());
        assert!(MollifierSpec::new(Profile::Bump, 0.0).is_err());
    }
}
