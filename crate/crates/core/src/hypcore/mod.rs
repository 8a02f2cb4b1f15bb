//! Hyperbolic geometry in the hyperboloid model.
//!
//! Points live on the upper sheet of `-x0^2 + x1^2 + ... + xd^2 = -1` with base
//! point `(1, 0, ..., 0)`. Other models appear only at I/O boundaries.

mod horoball;
mod isometry;
mod measure;
mod point;
mod sampling;

pub use horoball::horoball_hit_prob;
pub use isometry::Isometry;
pub use point::{
    busemann, dist, exp_map, from_half_space, from_poincare_ball, half_space_dist, minkowski, to_half_space,
    to_poincare_ball, translate, Horoball, Point, TangentVec,
};
pub(crate) use point::{busemann_spatial, exp_origin};
pub use sampling::{uniform_direction, RadialSampler};

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 7;

/// Dimension together with the unit-sphere constants it needs.
///
/// `omega[n] = 2 pi^{n/2} / Gamma(n/2)` is the surface area of the unit sphere
/// in `R^n`, `kappa[n] = omega[n] / n` the volume of the unit ball, `kappa[0] = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Space {
    d: usize,
    omega: [f64; MAX_DIM + 3],
    kappa: [f64; MAX_DIM + 3],
}

impl Space {
    pub fn new(d: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::Unsupported(format!("dimension {d}; supported range is 2..={MAX_DIM}")));
        }
        let mut omega = [0.0; MAX_DIM + 3];
        let mut kappa = [0.0; MAX_DIM + 3];
        kappa[0] = 1.0;
        for n in 1..MAX_DIM + 3 {
            let half = n as f64 / 2.0;
            omega[n] = 2.0 * std::f64::consts::PI.powf(half) / gamma(half);
            kappa[n] = omega[n] / n as f64;
        }
        Ok(Self { d, omega, kappa })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Surface area of the unit sphere in `R^n`, `n <= MAX_DIM + 2`.
    pub fn omega(&self, n: usize) -> f64 {
        self.omega[n]
    }

    /// Volume of the unit ball in `R^n`, `n <= MAX_DIM + 2`.
    pub fn kappa(&self, n: usize) -> f64 {
        self.kappa[n]
    }

    /// `omega_d`, the total measure of the unit tangent sphere.
    pub fn omega_d(&self) -> f64 {
        self.omega[self.d]
    }

    pub fn origin(&self) -> Point {
        Point::origin(self.d)
    }
}
