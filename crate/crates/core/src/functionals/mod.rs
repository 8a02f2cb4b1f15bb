//! Monte Carlo and combinatorial estimators of functionals of `Z cap B_R`.

mod index;
mod nerve;

pub use index::GrainIndex;
pub use nerve::{common_point, euler_char_2d, nerve_build, nerve_build_capped, v0_2d, Nerve, DEFAULT_CLIQUE_CAP};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::hypcore::RadialSampler;
use crate::process::Realization;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

impl FunctionalEstimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0, n_samples: 0 }
    }
}

/// Hit-or-miss volume of `Z cap B_R` from `n` uniform points of the window.
pub fn estimate_volume<R: Rng + ?Sized>(real: &Realization, n: usize, rng: &mut R) -> Result<FunctionalEstimate> {
    if n == 0 {
        return Err(domain("volume samples", 0.0));
    }
    let space = real.space();
    let vol = space.ball_volume(real.window_radius)?;
    if real.grains.is_empty() {
        return Ok(FunctionalEstimate { value: 0.0, std_error: 0.0, n_samples: n as u64 });
    }
    let index = GrainIndex::new(&real.grains, space.dim());
    let sampler = RadialSampler::new(space, real.window_radius)?;
    let hits = (0..n).filter(|_| index.covered(&sampler.sample(rng))).count();
    let p = hits as f64 / n as f64;
    Ok(FunctionalEstimate { value: vol * p, std_error: vol * (p * (1.0 - p) / n as f64).sqrt(), n_samples: n as u64 })
}

/// Boundary measure `V_{d-1}(Z cap B_R)`: the part of each grain sphere inside
/// the window and outside the other grains, plus the covered part of the
/// window sphere. The window sphere gets
/// `ceil(n_per_grain area(R) / area(r_max))` samples.
pub fn estimate_surface<R: Rng + ?Sized>(real: &Realization, n_per_grain: usize, rng: &mut R) -> Result<FunctionalEstimate> {
    if n_per_grain == 0 {
        return Err(domain("surface samples per grain", 0.0));
    }
    let space = real.space();
    if real.grains.is_empty() {
        return Ok(FunctionalEstimate { value: 0.0, std_error: 0.0, n_samples: 0 });
    }
    let index = GrainIndex::new(&real.grains, space.dim());
    let ch_window = real.window_radius.cosh();
    let (mut value, mut var, mut total) = (0.0, 0.0, 0u64);
    for (i, g) in real.grains.iter().enumerate() {
        let area = space.sphere_area(g.radius)?;
        let mut kept = 0usize;
        for _ in 0..n_per_grain {
            let x = space.sample_sphere(rng, &g.center, g.radius);
            if x.time() <= ch_window && !index.covered_except(&x, Some(i)) {
                kept += 1;
            }
        }
        let p = kept as f64 / n_per_grain as f64;
        value += area * p;
        var += area * area * p * (1.0 - p) / n_per_grain as f64;
        total += n_per_grain as u64;
    }
    let window_area = space.sphere_area(real.window_radius)?;
    let r_max = real.params.radius.r_max();
    let n_w = ((n_per_grain as f64 * window_area / space.sphere_area(r_max)?).ceil() as usize).max(n_per_grain);
    let origin = space.origin();
    let hits = (0..n_w).filter(|_| index.covered(&space.sample_sphere(rng, &origin, real.window_radius))).count();
    let p = hits as f64 / n_w as f64;
    value += window_area * p;
    var += window_area * window_area * p * (1.0 - p) / n_w as f64;
    total += n_w as u64;
    Ok(FunctionalEstimate { value, std_error: var.sqrt(), n_samples: total })
}

#[cfg(test)]
mod tests;
