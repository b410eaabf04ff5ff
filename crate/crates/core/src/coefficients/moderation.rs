use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest negligibility order probed.
pub const MAX_NEGLIGIBILITY_ORDER: u32 = 10;

/// A bound `norm <= C w^q` is accepted when no sample exceeds the coarsest
/// sample's ratio `norm / w^q` by more than this factor.
pub const GROWTH_ALLOWANCE: f64 = 10.0;

/// Log-scale noise level used to floor the total variance in the fit quality.
pub const LOG_NOISE_FLOOR: f64 = 1e-2;

pub const MIN_SAMPLES: usize = 4;

/// Least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// `1 - SS_res / max(SS_tot, n * LOG_NOISE_FLOOR^2)`.
    pub quality: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let quality = 1.0 - ss_res / ss_tot.max(n * LOG_NOISE_FLOOR * LOG_NOISE_FLOOR);
    LineFit {
        slope,
        intercept,
        quality,
    }
}

/// Slope of `log y` against `log x`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> LineFit {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

/// Whether the sampled net stays below `C w^q` as `eps` decreases.
///
/// Samples must be ordered by decreasing `eps`. Zero norms satisfy every bound.
pub fn bounded_by_power(omegas: &[f64], norms: &[f64], q: f64) -> bool {
    let ratios: Vec<f64> = omegas
        .iter()
        .zip(norms)
        .map(|(w, n)| if *n == 0.0 { 0.0 } else { n * w.powf(-q) })
        .collect();
    let anchor = ratios[0];
    ratios.iter().all(|&r| r <= GROWTH_ALLOWANCE * anchor)
}

/// Per-order negligibility verdicts `(q, passes)` for `q = 0..=max_q`.
pub fn negligibility_profile(
    epsilons: &[f64],
    norms: &[f64],
    scale_power: f64,
    max_q: u32,
) -> Result<Vec<(u32, bool)>> {
    check_samples(epsilons, norms, false)?;
    let omegas: Vec<f64> = epsilons.iter().map(|e| e.powf(scale_power)).collect();
    Ok((0..=max_q)
        .map(|q| (q, bounded_by_power(&omegas, norms, q as f64)))
        .collect())
}

/// Largest `q` such that every order up to `q` passes.
pub fn negligible_up_to(profile: &[(u32, bool)]) -> Option<u32> {
    let passed = profile.iter().take_while(|(_, ok)| *ok).count();
    if passed == 0 {
        None
    } else {
        Some(profile[passed - 1].0)
    }
}

fn check_samples(epsilons: &[f64], norms: &[f64], strictly_positive: bool) -> Result<()> {
    if epsilons.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: epsilons.len(),
        });
    }
    if epsilons.len() != norms.len() {
        return Err(Error::InvalidSamples(format!(
            "{} epsilons but {} norms",
            epsilons.len(),
            norms.len()
        )));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) || epsilons.iter().any(|e| e.is_nan() || *e <= 0.0) {
        return Err(Error::InvalidSamples(
            "epsilons must be positive and strictly decreasing".into(),
        ));
    }
    let bad = |n: &f64| {
        !n.is_finite() || if strictly_positive { *n <= 0.0 } else { *n < 0.0 }
    };
    if norms.iter().any(bad) {
        return Err(Error::InvalidSamples(format!(
            "norms must be finite and {}",
            if strictly_positive { "positive" } else { "nonnegative" }
        )));
    }
    Ok(())
}

/// Summary of a net `eps -> ||g_eps||` against powers of `w(eps) = eps^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModerationReport {
    pub epsilons: Vec<f64>,
    pub norms: Vec<f64>,
    pub scale_power: f64,
    /// `N` in `||g_eps|| ~ C w(eps)^{-N}`.
    pub fitted_exponent: f64,
    pub fit_quality: f64,
    pub negligible_up_to_q: Option<u32>,
}

impl ModerationReport {
    pub fn omegas(&self) -> Vec<f64> {
        self.epsilons.iter().map(|e| e.powf(self.scale_power)).collect()
    }

    /// Finite exponent and no growth beyond `w^{-ceil(N)}`.
    ///
    /// The fit quality is not consulted: bounded nets that converge as `eps`
    /// decreases are moderate but follow no power law.
    pub fn is_moderate(&self) -> bool {
        if !self.fitted_exponent.is_finite() {
            return false;
        }
        let order = (self.fitted_exponent - 1e-3).ceil().max(0.0);
        bounded_by_power(&self.omegas(), &self.norms, -order)
    }
}

pub fn fit_moderateness(
    epsilons: &[f64],
    norms: &[f64],
    scale_power: f64,
) -> Result<ModerationReport> {
    if scale_power.is_nan() || scale_power <= 0.0 {
        return Err(Error::InvalidMollifier(format!(
            "scale power must be positive, got {scale_power}"
        )));
    }
    check_samples(epsilons, norms, true)?;
    let omegas: Vec<f64> = epsilons.iter().map(|e| e.powf(scale_power)).collect();
    let fit = loglog_fit(&omegas, norms);
    let profile = negligibility_profile(epsilons, norms, scale_power, MAX_NEGLIGIBILITY_ORDER)?;
    Ok(ModerationReport {
        epsilons: epsilons.to_vec(),
        norms: norms.to_vec(),
        scale_power,
        fitted_exponent: -fit.slope,
        fit_quality: fit.quality,
        negligible_up_to_q: negligible_up_to(&profile),
    })
}
