//! Periodic grids, discrete Fourier transforms and Fourier multipliers.
//!
//! The whole space is modelled by the torus `[0, L)^d`. Derivatives and the
//! Riesz operator `(-Delta)^{s/2}` are diagonal in the Fourier basis; products
//! with coefficients are formed pointwise on the grid.

mod field;
mod grid;
mod ops;
mod transform;

pub use field::Field;
pub(crate) use field::dot;
pub use grid::{GridSpec, WaveVector};
pub use ops::{
    apply_multiplier, divergence, fractional_laplacian_half, gradient, gradient_norm_sq, norms,
    product, riesz_power, Dealias, Norms,
};
pub(crate) use ops::{check_order, product_unchecked};
pub use transform::{forward_transform, inverse_transform, Spectrum, SYMMETRY_TOLERANCE};
pub(crate) use transform::{forward_raw, inverse_real};
