//! Pseudo-spectral solver for the heat equation `u_t + L u = 0` driven by the
//! mixed local-nonlocal operator
//!
//! ```text
//! L u = -div(a grad u) + (-Delta)^{s/2} (b (-Delta)^{s/2} u) + c u
//! ```
//!
//! with rough (distributional) coefficients, together with the machinery to
//! regularise such data by mollification and to study the resulting nets of
//! solutions as the regularisation scale shrinks.

pub mod coefficients;
pub mod error;
pub mod evolve;
pub mod nets;
pub mod operator;
pub mod spectral;

pub use error::{Error, Result};
