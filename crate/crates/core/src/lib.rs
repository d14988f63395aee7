//! Numerical toolkit for weighted Bergman-space extension bounds on the disk
//! and bidisk.
//!
//! The crate is organized around denominator functions g on [1, oo) whose
//! reciprocal has finite mass. From a [`denom::DenominatorSpec`] it computes
//! the damped tail ratio G_delta, the twist integral h, the supremum constant
//! K_delta, certified membership checks with machine-checkable witnesses
//! ([`certify`]), closed-form and optimized extension constants
//! ([`constants`]), and discretized minimal-extension problems on the disk
//! and bidisk ([`bergman`]).
//!
//! Heavy scans and grid sweeps run on a rayon pool when the `parallel`
//! feature (on by default) is enabled; results are bit-identical to the
//! sequential fallback because every reduction is ordered.

pub mod bergman;
pub mod certify;
pub mod constants;
pub mod denom;
pub mod error;
pub mod expr;
pub mod par;
pub mod quad;
pub mod search;

pub use error::{Error, Result};
