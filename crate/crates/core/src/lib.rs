//! Stationary Boolean models with ball grains in hyperbolic space.
//!
//! The crate samples Poisson ball-grain processes in a ball window, estimates
//! volume, surface area and Euler characteristic of the union set, and
//! evaluates the closed-form and quadrature predictions for their means,
//! variances and covariances, including the horoball integrals that govern
//! the large-window limits.

pub mod covering;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod hypcore;
pub mod quadrature;
pub mod process;
pub mod rng;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
