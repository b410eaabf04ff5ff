//! Distributional data, Friedrichs mollifiers and regularisation nets.
//!
//! Rough coefficients and initial data are described symbolically (smooth
//! closed forms, point masses and their derivatives) and regularised by
//! convolution with `psi_{w(eps)}`. The moderateness/negligibility analysers
//! classify how a net of norms behaves as `eps -> 0`.

mod distribution;
mod expr;
mod moderation;
mod mollifier;

pub use distribution::{
    regularize, regularize_coefficient, CoefficientSpec, DistributionSpec, Term, FLOOR_SLACK,
};
pub use expr::Expr;
pub use moderation::{
    bounded_by_power, fit_line, fit_moderateness, loglog_fit, negligibility_profile,
    negligible_up_to, LineFit, ModerationReport, GROWTH_ALLOWANCE, LOG_NOISE_FLOOR,
    MAX_NEGLIGIBILITY_ORDER, MIN_SAMPLES,
};
pub use mollifier::{sample_mollifier, MollifierSpec, Profile};
