use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::field::Field;
use super::grid::{GridSpec, WaveVector};
use super::transform::{fft_in_place, forward_raw, inverse_real};

/// Multiplies the spectrum of `u` by `symbol(k)` and transforms back.
///
/// The symbol must map conjugate-symmetric spectra to conjugate-symmetric
/// spectra (real even symbols, or `i k` with the Nyquist mode dropped).
pub fn apply_multiplier(u: &Field, symbol: impl Fn(&WaveVector) -> Complex64) -> Field {
    let grid = *u.grid();
    let mut coeffs = forward_raw(&grid, u.values());
    for (i, c) in coeffs.iter_mut().enumerate() {
        *c *= symbol(&grid.wave_vector(i));
    }
    Field::from_raw(grid, inverse_real(&grid, coeffs))
}

pub(crate) fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(s))
    }
}

/// `(-Delta)^{s/2}`: the Fourier multiplier `|k|^s`, with `|0|^s = 0`.
pub fn fractional_laplacian_half(u: &Field, s: f64) -> Result<Field> {
    check_order(s)?;
    Ok(riesz_power(u, s))
}

/// Fourier multiplier `|k|^p` for an arbitrary exponent `p > 0`.
pub fn riesz_power(u: &Field, p: f64) -> Field {
    apply_multiplier(u, |w| Complex64::new(w.abs_power(p), 0.0))
}

pub fn gradient(u: &Field) -> Vec<Field> {
    let grid = *u.grid();
    let coeffs = forward_raw(&grid, u.values());
    (0..grid.dimension)
        .map(|axis| {
            let comp: Vec<Complex64> = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * Complex64::new(0.0, grid.wave_vector(i).derivative_k(axis)))
                .collect();
            Field::from_raw(grid, inverse_real(&grid, comp))
        })
        .collect()
}

pub fn divergence(components: &[Field]) -> Result<Field> {
    let first = components
        .first()
        .ok_or_else(|| Error::InvalidField("divergence of an empty vector field".into()))?;
    let grid = *first.grid();
    if components.len() != grid.dimension {
        return Err(Error::InvalidField(format!(
            "expected {} components, got {}",
            grid.dimension,
            components.len()
        )));
    }
    for c in components {
        first.ensure_same_grid(c)?;
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (axis, comp) in components.iter().enumerate() {
        let coeffs = forward_raw(&grid, comp.values());
        for (i, (a, c)) in acc.iter_mut().zip(coeffs).enumerate() {
            *a += c * Complex64::new(0.0, grid.wave_vector(i).derivative_k(axis));
        }
    }
    Ok(Field::from_raw(grid, inverse_real(&grid, acc)))
}

/// `||grad u||^2_{L^2}` evaluated spectrally.
pub fn gradient_norm_sq(u: &Field) -> f64 {
    spectral_quadratic(u, |w| w.local_symbol())
}

/// `L^d sum sigma(k) |u_hat(k)|^2` for a nonnegative symbol.
pub(crate) fn spectral_quadratic(u: &Field, sigma: impl Fn(&WaveVector) -> f64) -> f64 {
    let grid = *u.grid();
    let coeffs = forward_raw(&grid, u.values());
    let s: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| sigma(&grid.wave_vector(i)) * c.norm_sqr())
        .sum();
    s * grid.volume()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub hs_seminorm: f64,
}

pub fn norms(u: &Field, s: f64) -> Result<Norms> {
    check_order(s)?;
    let grid = *u.grid();
    let coeffs = forward_raw(&grid, u.values());
    let (mut grad, mut frac) = (0.0, 0.0);
    for (i, c) in coeffs.iter().enumerate() {
        let w = grid.wave_vector(i);
        grad += w.local_symbol() * c.norm_sqr();
        frac += w.abs_power(2.0 * s) * c.norm_sqr();
    }
    let l2_sq = u.l2_norm_sq();
    Ok(Norms {
        l2: l2_sq.sqrt(),
        h1: (l2_sq + grad * grid.volume()).sqrt(),
        hs_seminorm: (frac * grid.volume()).sqrt(),
    })
}

/// How pointwise products of fields are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    /// Collocation product on the grid; aliasing error is kept.
    #[default]
    None,
    /// Product on a 3/2 zero-padded grid, truncated back (Nyquist dropped).
    ThreeHalves,
}

pub fn product(a: &Field, b: &Field, mode: Dealias) -> Result<Field> {
    a.ensure_same_grid(b)?;
    Ok(product_unchecked(a, b, mode))
}

pub(crate) fn product_unchecked(a: &Field, b: &Field, mode: Dealias) -> Field {
    match mode {
        Dealias::None => a.zip_unchecked(b, |x, y| x * y),
        Dealias::ThreeHalves => padded_product(a, b),
    }
}

fn padded_targets(grid: &GridSpec, padded: usize, index: usize) -> Vec<(usize, f64)> {
    let n = grid.points;
    let f = grid.signed_frequency(index);
    let wrap = |f: i64| f.rem_euclid(padded as i64) as usize;
    if index == n / 2 {
        vec![(wrap(f), 0.5), (wrap(-f), 0.5)]
    } else {
        vec![(wrap(f), 1.0)]
    }
}

fn padded_product(a: &Field, b: &Field) -> Field {
    let grid = *a.grid();
    let n = grid.points;
    let m = 3 * n / 2;
    let d = grid.dimension;
    let padded_len = m.pow(d as u32);

    let lift = |u: &Field| -> Vec<Complex64> {
        let coeffs = forward_raw(&grid, u.values());
        let mut out = vec![Complex64::new(0.0, 0.0); padded_len];
        for (flat, c) in coeffs.iter().enumerate() {
            let [i, j] = grid.multi_index(flat);
            let ti = padded_targets(&grid, m, i);
            if d == 1 {
                for &(p, w) in &ti {
                    out[p] += c * w;
                }
            } else {
                let tj = padded_targets(&grid, m, j);
                for &(p, wp) in &ti {
                    for &(q, wq) in &tj {
                        out[p * m + q] += c * (wp * wq);
                    }
                }
            }
        }
        fft_in_place(d, m, &mut out, true);
        out
    };

    let pa = lift(a);
    let pb = lift(b);
    let mut prod: Vec<Complex64> = pa
        .iter()
        .zip(&pb)
        .map(|(x, y)| Complex64::new(x.re * y.re, 0.0))
        .collect();
    fft_in_place(d, m, &mut prod, false);
    let scale = 1.0 / padded_len as f64;

    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let wrap = |f: i64| f.rem_euclid(m as i64) as usize;
    for (flat, c) in coeffs.iter_mut().enumerate() {
        let [i, j] = grid.multi_index(flat);
        if i == n / 2 || (d == 2 && j == n / 2) {
            continue;
        }
        let pi = wrap(grid.signed_frequency(i));
        let src = if d == 1 {
            pi
        } else {
            pi * m + wrap(grid.signed_frequency(j))
        };
        *c = prod[src] * scale;
    }
    Field::from_raw(grid, inverse_real(&grid, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: &Field, b: &Field, tol: f64) {
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn fractional_half_on_eigenfunction() {
        let l = 3.0;
        let g = GridSpec::new(1, 32, l).unwrap();
        let k = 2.0 * PI / l;
        let u = Field::from_fn(g, |x| (k * x[0]).cos());
        for s in [0.2, 0.5, 0.9] {
            let out = fractional_laplacian_half(&u, s).unwrap();
            close(&out, &u.scale(k.powf(s)), 1e-12);
        }
        let c = fractional_laplacian_half(&Field::constant(g, 4.0), 0.4).unwrap();
        assert!(c.sup_norm() < 1e-14);
    }

    #[test]
    fn invalid_order_is_rejected() {
        let g = GridSpec::new(1, 16, 1.0).unwrap();
        let u = Field::zeros(g);
        for s in [0.0, 1.0, -0.3, 1.5] {
            assert_eq!(fractional_laplacian_half(&u, s), Err(Error::InvalidOrder(s)));
        }
    }

    #[test]
    fn twice_half_equals_full_multiplier() {
        let g = GridSpec::new(2, 16, 2.0).unwrap();
        let u = Field::from_fn(g, |x| (x[0] * 3.0).sin() * (-(x[1] - 1.0).powi(2)).exp());
        let s = 0.35;
        let twice = fractional_laplacian_half(&fractional_laplacian_half(&u, s).unwrap(), s).unwrap();
        let once = riesz_power(&u, 2.0 * s);
        close(&twice, &once, 1e-12 * once.sup_norm().max(1.0));
    }

    #[test]
    fn gradient_of_sines() {
        let g = GridSpec::new(2, 32, 2.0 * PI).unwrap();
        let k = 1.0;
        let u = Field::from_fn(g, |x| (k * x[0]).sin() * (k * x[1]).sin());
        let gr = gradient(&u);
        let ex = Field::from_fn(g, |x| k * (k * x[0]).cos() * (k * x[1]).sin());
        let ey = Field::from_fn(g, |x| k * (k * x[0]).sin() * (k * x[1]).cos());
        close(&gr[0], &ex, 1e-12);
        close(&gr[1], &ey, 1e-12);
        let zero = gradient(&Field::constant(g, 2.0));
        assert!(zero.iter().all(|f| f.sup_norm() < 1e-14));
    }

    #[test]
    fn divergence_identities() {
        let g = GridSpec::new(1, 32, 2.0 * PI).unwrap();
        let u = Field::from_fn(g, |x| (2.0 * x[0]).cos());
        let lap = divergence(&gradient(&u)).unwrap();
        close(&lap, &u.scale(-4.0), 1e-12);

        let g2 = GridSpec::new(2, 32, 2.0 * PI).unwrap();
        let phi = Field::from_fn(g2, |x| (x[0]).sin() * (2.0 * x[1]).cos() + (x[0] + x[1]).cos());
        let gp = gradient(&phi);
        let curl = [gp[1].scale(-1.0), gp[0].clone()];
        let div = divergence(&curl).unwrap();
        assert!(div.sup_norm() < 1e-12);
        let constant = [Field::constant(g2, 1.0), Field::constant(g2, -2.0)];
        assert!(divergence(&constant).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn divergence_rejects_mixed_grids() {
        let g = GridSpec::new(2, 16, 1.0).unwrap();
        let h = GridSpec::new(2, 32, 1.0).unwrap();
        assert_eq!(
            divergence(&[Field::zeros(g), Field::zeros(h)]),
            Err(Error::GridMismatch)
        );
    }

    #[test]
    fn norms_of_cosine() {
        let g = GridSpec::new(1, 64, 2.0 * PI).unwrap();
        let u = Field::from_fn(g, |x| x[0].cos());
        let n = norms(&u, 0.5).unwrap();
        assert!((n.l2 * n.l2 - PI).abs() < 1e-12);
        assert!((n.hs_seminorm * n.hs_seminorm - PI).abs() < 1e-12);
        assert!((n.h1 * n.h1 - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn dealiased_product_matches_collocation_for_low_modes() {
        let g = GridSpec::new(2, 16, 2.0 * PI).unwrap();
        let a = Field::from_fn(g, |x| 2.0 + x[0].sin() + (2.0 * x[1]).cos());
        let b = Field::from_fn(g, |x| (x[0] + x[1]).cos());
        let p = product(&a, &b, Dealias::ThreeHalves).unwrap();
        let q = product(&a, &b, Dealias::None).unwrap();
        close(&p, &q, 1e-12);
    }

    #[test]
    fn dealiased_product_removes_aliased_mode() {
        // modes 6 + 6 = 12 alias onto -4 on a 16-point grid
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        let a = Field::from_fn(g, |x| (6.0 * x[0]).cos());
        let p = product(&a, &a, Dealias::ThreeHalves).unwrap();
        close(&p, &Field::constant(g, 0.5), 1e-12);
        let q = product(&a, &a, Dealias::None).unwrap();
        let aliased = Field::from_fn(g, |x| 0.5 + 0.5 * (4.0 * x[0]).cos());
        close(&q, &aliased, 1e-12);
    }
}
