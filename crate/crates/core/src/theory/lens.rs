//! Intersections of two geodesic balls and the mean covariogram.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::hypcore::Space;
use crate::process::{ModelParams, RadiusDistribution};
use crate::quadrature::Integrator;

use super::interp::MonotoneCubic;

/// Grid size of the covariogram table.
pub const COVARIOGRAM_POINTS: usize = 1025;

fn check(r1: f64, r2: f64, s: f64) -> Result<()> {
    if !(r1 >= 0.0) {
        return Err(domain("radius", r1));
    }
    if !(r2 >= 0.0) {
        return Err(domain("radius", r2));
    }
    if !(s >= 0.0) {
        return Err(domain("distance", s));
    }
    Ok(())
}

/// Cosine of the angle at `p`, seen from a point at distance `rho` from `p`,
/// beyond which the point leaves `B(x, r2)` with `dist(p, x) = s`.
fn cos_threshold(s: f64, rho: f64, r2: f64) -> f64 {
    // cosh s cosh rho - cosh r2 in half-angle form, accurate for small arguments
    let h = |x: f64| {
        let v = (0.5 * x).sinh();
        v * v
    };
    let (a, b, c) = (h(s), h(rho), h(r2));
    (2.0 * (a + b - c) + 4.0 * a * b) / (s.sinh() * rho.sinh())
}

/// Volume of `B(p, r1) ∩ B(x, r2)` with `dist(p, x) = s`.
///
/// Slices `B(p, r1)` into spheres of radius `rho` and integrates the cap of
/// each sphere that lies in the second ball.
pub fn lens_volume(space: &Space, r1: f64, r2: f64, s: f64) -> Result<f64> {
    check(r1, r2, s)?;
    if s >= r1 + r2 {
        return Ok(0.0);
    }
    if s <= (r1 - r2).abs() {
        return space.ball_volume(r1.min(r2));
    }
    // spheres with rho < r2 - s lie inside the second ball
    let inner = if r2 > s { space.ball_volume(r2 - s)? } else { 0.0 };
    let lo = (s - r2).abs();
    let hi = r1.min(s + r2);
    if hi <= lo {
        return Ok(inner);
    }
    let p = space.dim() as i32 - 1;
    // rho = lo + (hi - lo)(1 - cos phi)/2 removes the square-root behavior of
    // the cap fraction at both ends
    let half = 0.5 * (hi - lo);
    let f = |phi: f64| {
        let rho = lo + half * (1.0 - phi.cos());
        rho.sinh().powi(p) * space.cap_fraction(cos_threshold(s, rho, r2)) * half * phi.sin()
    };
    let scale = space.ball_volume(r1.min(r2))?;
    let q = Integrator::new()
        .abs_tol(1e-15 * scale.max(1e-300))
        .rel_tol(1e-13)
        .integrate(f, 0.0, std::f64::consts::PI)?;
    Ok(inner + space.omega_d() * q.value)
}

/// Surface area of `B(p, r1) ∩ B(x, r2)` with `dist(p, x) = s`: the two
/// spherical caps bounding the lens.
pub fn lens_surface(space: &Space, r1: f64, r2: f64, s: f64) -> Result<f64> {
    check(r1, r2, s)?;
    if s >= r1 + r2 {
        return Ok(0.0);
    }
    if s <= (r1 - r2).abs() {
        return space.sphere_area(r1.min(r2));
    }
    let c1 = cos_threshold(s, r1, r2);
    let c2 = cos_threshold(s, r2, r1);
    Ok(space.sphere_area(r1)? * space.cap_fraction(c1) + space.sphere_area(r2)? * space.cap_fraction(c2))
}

/// Tabulated mean covariogram `C(s) = E lens_volume(U, U, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariogramTable {
    interp: MonotoneCubic,
    support: f64,
}

impl CovariogramTable {
    pub fn eval(&self, s: f64) -> f64 {
        if s >= self.support {
            0.0
        } else {
            self.interp.eval(s.max(0.0)).max(0.0)
        }
    }

    /// `2 r_max`; `C` vanishes beyond it.
    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn grid(&self) -> Vec<f64> {
        self.interp.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.interp.values()
    }
}

/// `E lens_volume(U, U, s)` for the radius law, by quadrature over `U`.
pub fn mean_lens(space: &Space, radius: &RadiusDistribution, s: f64) -> Result<f64> {
    match *radius {
        RadiusDistribution::Fixed { r } => lens_volume(space, r, r, s),
        RadiusDistribution::Uniform { a, b } => {
            let lo = a.max(0.5 * s);
            if lo >= b {
                return Ok(0.0);
            }
            let mut err = None;
            // u = lo + (b - lo)(1 - cos phi)/2 smooths the onset of the lens at u = s/2
            let half = 0.5 * (b - lo);
            let q = Integrator::new().abs_tol(1e-13).rel_tol(1e-11).integrate(
                |phi: f64| match lens_volume(space, lo + half * (1.0 - phi.cos()), lo + half * (1.0 - phi.cos()), s) {
                    Ok(v) => v * half * phi.sin(),
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                0.0,
                std::f64::consts::PI,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            Ok(q.value / (b - a))
        }
    }
}

pub fn covariogram(params: &ModelParams) -> Result<CovariogramTable> {
    covariogram_with(params, COVARIOGRAM_POINTS)
}

pub fn covariogram_with(params: &ModelParams, points: usize) -> Result<CovariogramTable> {
    let space = params.space();
    let support = 2.0 * params.radius.r_max();
    let h = support / (points - 1) as f64;
    let values = (0..points)
        .map(|i| if i == points - 1 { Ok(0.0) } else { mean_lens(&space, &params.radius, i as f64 * h) })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CovariogramTable { interp: MonotoneCubic::new(0.0, h, values), support })
}

/// Tabulated `lens_volume(R, R, s)` on `[0, smax]`.
pub(crate) fn window_lens_table(space: &Space, window: f64, smax: f64, points: usize) -> Result<MonotoneCubic> {
    let h = smax / (points - 1) as f64;
    let values = (0..points)
        .map(|i| lens_volume(space, window, window, i as f64 * h))
        .collect::<Result<Vec<f64>>>()?;
    Ok(MonotoneCubic::new(0.0, h, values))
}
