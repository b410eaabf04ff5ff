#![allow(dead_code)]

use std::f64::consts::PI;

use nlheat::spectral::{Field, GridSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random trigonometric polynomial with `modes` frequencies per axis and
/// amplitudes decaying like `1 / (1 + |m|)^decay`.
pub fn random_field(grid: GridSpec, rng: &mut ChaCha8Rng, modes: i64, decay: f64) -> Field {
    let mut terms = Vec::new();
    let ys: Vec<i64> = if grid.dimension == 2 { (0..=modes).collect() } else { vec![0] };
    for mx in 0..=modes {
        for &my in &ys {
            let amp = rng.gen_range(-1.0..1.0) / (1.0 + ((mx * mx + my * my) as f64).sqrt()).powf(decay);
            let phase = rng.gen_range(0.0..2.0 * PI);
            terms.push((mx as f64, my as f64, amp, phase));
        }
    }
    let l = grid.length;
    Field::from_fn(grid, move |x| {
        terms
            .iter()
            .map(|(mx, my, a, ph)| a * (2.0 * PI * (mx * x[0] + my * x[1]) / l + ph).cos())
            .sum()
    })
}

/// `floor + |random field|`, an admissible coefficient.
pub fn random_coefficient(grid: GridSpec, rng: &mut ChaCha8Rng, floor: f64) -> Field {
    random_field(grid, rng, 3, 1.0).map(|v| floor + v.abs())
}

/// Naive `O(N^2)` discrete Fourier transform, normalised by `1/N`.
pub fn naive_dft(values: &[f64]) -> Vec<(f64, f64)> {
    let n = values.len();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let t = -2.0 * PI * (k * j) as f64 / n as f64;
                re += v * t.cos();
                im += v * t.sin();
            }
            (re / n as f64, im / n as f64)
        })
        .collect()
}

/// Inverse of [`naive_dft`], real part.
pub fn naive_idft(coeffs: &[(f64, f64)]) -> Vec<f64> {
    let n = coeffs.len();
    (0..n)
        .map(|j| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (re, im))| {
                    let t = 2.0 * PI * (k * j) as f64 / n as f64;
                    re * t.cos() - im * t.sin()
                })
                .sum()
        })
        .collect()
}

pub fn signed(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Relative error `max|a-b| / max|b|`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    num / den
}
