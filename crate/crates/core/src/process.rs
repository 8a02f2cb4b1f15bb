//! Poisson ball-grain processes restricted to a ball window.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::hypcore::{dist, to_poincare_ball, Point, RadialSampler, Space};
use crate::quadrature::Integrator;
use crate::rng::{stream, stream_rng};

/// Default bound on the expected number of sampled centers.
pub const DEFAULT_COUNT_CAP: f64 = 1e7;

/// Distribution of grain radii. The support is bounded by `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RadiusDistribution {
    Fixed { r: f64 },
    Uniform { a: f64, b: f64 },
}

impl RadiusDistribution {
    pub fn fixed(r: f64) -> Result<Self> {
        let d = Self::Fixed { r };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let d = Self::Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Fixed { r } if !(r > 0.0 && r.is_finite()) => Err(domain("fixed radius", r)),
            Self::Uniform { a, b } if !(a >= 0.0 && b > a && b.is_finite()) => {
                Err(Error::DegenerateInput(format!("uniform radius support [{a}, {b}] needs 0 <= a < b < inf")))
            }
            _ => Ok(()),
        }
    }

    pub fn r_max(&self) -> f64 {
        match *self {
            Self::Fixed { r } => r,
            Self::Uniform { b, .. } => b,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Fixed { r } => r,
            Self::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
        }
    }

    /// `E f(U)`, by quadrature for uniform radii.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        match *self {
            Self::Fixed { r } => Ok(f(r)),
            Self::Uniform { a, b } => {
                let q = Integrator::new().abs_tol(1e-13).rel_tol(1e-13).integrate(f, a, b)?;
                Ok(q.value / (b - a))
            }
        }
    }

    /// Fallible variant of [`expect`](Self::expect).
    pub fn try_expect<F: FnMut(f64) -> Result<f64>>(&self, mut f: F) -> Result<f64> {
        let mut err = None;
        let v = self.expect(|r| match f(r) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Radius at probability level `q` in `[0, 1]`; used for stratified draws.
    pub fn quantile(&self, q: f64) -> f64 {
        match *self {
            Self::Fixed { r } => r,
            Self::Uniform { a, b } => a + (b - a) * q.clamp(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    /// Expected number of grain centers per unit volume.
    pub gamma: f64,
    pub radius: RadiusDistribution,
}

impl ModelParams {
    pub fn new(d: usize, gamma: f64, radius: RadiusDistribution) -> Result<Self> {
        let p = Self { d, gamma, radius };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        Space::new(self.d)?;
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(domain("intensity", self.gamma));
        }
        self.radius.validate()
    }

    pub fn space(&self) -> Space {
        Space::new(self.d).expect("validated dimension")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grain {
    pub center: Point,
    pub radius: f64,
    cosh_radius: f64,
}

impl Grain {
    pub fn new(center: Point, radius: f64) -> Self {
        Self { center, radius, cosh_radius: radius.cosh() }
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.center.cosh_dist(x) <= self.cosh_radius
    }

    pub fn cosh_radius(&self) -> f64 {
        self.cosh_radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub params: ModelParams,
    pub window_radius: f64,
    pub grains: Vec<Grain>,
    pub seed: u64,
}

impl Realization {
    /// A realization with explicitly given grains, for tests and diagnostics.
    pub fn from_grains(params: ModelParams, window_radius: f64, grains: Vec<Grain>) -> Self {
        Self { params, window_radius, grains, seed: 0 }
    }

    pub fn space(&self) -> Space {
        self.params.space()
    }

    /// Whether `x` lies in the union of the grains.
    pub fn covered_linear(&self, x: &Point) -> bool {
        self.grains.iter().any(|g| g.contains(x))
    }

    /// Text dump: a header comment, then `c_1 .. c_d radius` per grain with
    /// the center in Poincaré-ball coordinates.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# d = {}", self.params.d);
        let _ = writeln!(out, "# gamma = {:.17e}", self.params.gamma);
        let _ = writeln!(out, "# radius = {}", radius_spec(&self.params.radius));
        let _ = writeln!(out, "# window_R = {:.17e}", self.window_radius);
        let _ = writeln!(out, "# seed = {}", self.seed);
        let _ = writeln!(out, "# grains = {}", self.grains.len());
        for g in &self.grains {
            for c in to_poincare_ball(&g.center) {
                let _ = write!(out, "{c:.17e} ");
            }
            let _ = writeln!(out, "{:.17e}", g.radius);
        }
        out
    }
}

pub fn radius_spec(r: &RadiusDistribution) -> String {
    match *r {
        RadiusDistribution::Fixed { r } => format!("fixed {r:?}"),
        RadiusDistribution::Uniform { a, b } => format!("uniform {a:?} {b:?}"),
    }
}

/// Samples the grains hitting `B_R`.
///
/// `N ~ Poisson(gamma Vol(B_{R + r_max}))` centers are drawn uniformly in
/// `B_{R + r_max}` with independent radii; grains missing the window are
/// dropped. Uses the realization stream of `seed`.
pub fn sample_realization(params: &ModelParams, window_radius: f64, seed: u64) -> Result<Realization> {
    sample_realization_capped(params, window_radius, seed, DEFAULT_COUNT_CAP)
}

pub fn sample_realization_capped(params: &ModelParams, window_radius: f64, seed: u64, cap: f64) -> Result<Realization> {
    params.validate()?;
    if !(window_radius > 0.0 && window_radius.is_finite()) {
        return Err(domain("window radius", window_radius));
    }
    let space = params.space();
    let outer = window_radius + params.radius.r_max();
    let mean = params.gamma * space.ball_volume(outer)?;
    if mean > cap {
        return Err(Error::Resource(format!("expected {mean:.3e} grain centers exceeds the cap {cap:.3e}")));
    }
    let mut rng = stream_rng(seed, stream::REALIZATION);
    let count = if mean > 0.0 {
        Poisson::new(mean).map_err(|e| Error::Numeric(e.to_string()))?.sample(&mut rng) as usize
    } else {
        0
    };
    let sampler = RadialSampler::new(space, outer)?;
    let mut grains = Vec::new();
    for _ in 0..count {
        let center = sampler.sample(&mut rng);
        let radius = params.radius.sample(&mut rng);
        if center.norm() <= window_radius + radius {
            grains.push(Grain::new(center, radius));
        }
    }
    Ok(Realization { params: *params, window_radius, grains, seed })
}

/// `P(p not in Z) = exp(-gamma v_d)`.
pub fn empty_prob_point(params: &ModelParams) -> Result<f64> {
    let gm = crate::theory::grain_moments(params)?;
    Ok((-params.gamma * gm.v[params.d]).exp())
}

/// Fraction of `replicates` independent realizations whose union contains `x`.
pub fn empirical_coverage_at(params: &ModelParams, x: &Point, replicates: usize, seed: u64) -> Result<f64> {
    let window = (x.norm() + 1e-9).max(1e-6);
    let mut hits = 0usize;
    for r in 0..replicates as u64 {
        let real = sample_realization(params, window, crate::rng::replicate_seed(seed, r))?;
        if real.covered_linear(x) {
            hits += 1;
        }
    }
    Ok(hits as f64 / replicates.max(1) as f64)
}

/// Fraction of replicates whose union contains the base point.
pub fn empirical_coverage(params: &ModelParams, replicates: usize, seed: u64) -> Result<f64> {
    empirical_coverage_at(params, &params.space().origin(), replicates, seed)
}

/// Checks that every grain hits the window.
pub fn check_windowing(real: &Realization) -> Result<()> {
    let p = real.space().origin();
    for g in &real.grains {
        let s = dist(&p, &g.center)?;
        if s > real.window_radius + g.radius + 1e-9 {
            return Err(Error::InvariantViolation(format!("grain at distance {s} misses the window")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypcore::uniform_direction;

    fn planar_default() -> ModelParams {
        let space = Space::new(2).unwrap();
        let gamma = 500.0 / space.ball_volume(5.0).unwrap();
        ModelParams::new(2, gamma, RadiusDistribution::uniform(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn validation() {
        assert!(RadiusDistribution::fixed(0.0).is_err());
        assert!(RadiusDistribution::uniform(1.0, 1.0).is_err());
        assert!(RadiusDistribution::uniform(-0.1, 1.0).is_err());
        assert!(ModelParams::new(2, -1.0, RadiusDistribution::fixed(1.0).unwrap()).is_err());
        assert!(ModelParams::new(1, 1.0, RadiusDistribution::fixed(1.0).unwrap()).is_err());
    }

    #[test]
    fn deterministic_and_windowed() {
        let p = planar_default();
        let a = sample_realization(&p, 5.0, 11).unwrap();
        let b = sample_realization(&p, 5.0, 11).unwrap();
        assert_eq!(a, b);
        check_windowing(&a).unwrap();
        assert!(!a.grains.is_empty());
    }

    #[test]
    fn zero_intensity_is_empty() {
        let p = ModelParams::new(2, 0.0, RadiusDistribution::fixed(1.0).unwrap()).unwrap();
        assert!(sample_realization(&p, 3.0, 1).unwrap().grains.is_empty());
        assert_eq!(empty_prob_point(&p).unwrap(), 1.0);
    }

    #[test]
    fn count_cap() {
        let p = ModelParams::new(2, 1.0, RadiusDistribution::fixed(1.0).unwrap()).unwrap();
        assert!(matches!(sample_realization_capped(&p, 10.0, 1, 1e3), Err(Error::Resource(_))));
    }

    #[test]
    fn center_intensity() {
        // centers in B_1 before any discarding: all of them hit B_1
        let p = ModelParams::new(2, 3.0, RadiusDistribution::fixed(0.5).unwrap()).unwrap();
        let space = p.space();
        let n = 1000;
        let counts: Vec<f64> = (0..n)
            .map(|r| {
                let real = sample_realization(&p, 1.0, 100 + r).unwrap();
                real.grains.iter().filter(|g| g.center.norm() <= 1.0).count() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let target = p.gamma * space.ball_volume(1.0).unwrap();
        assert!((mean - target).abs() < 3.0 * (var / n as f64).sqrt(), "{mean} vs {target}");
    }

    #[test]
    fn hit_count_matches_oracle() {
        let p = planar_default();
        let space = p.space();
        let n = 300;
        let counts: Vec<f64> = (0..n).map(|r| sample_realization(&p, 5.0, 500 + r).unwrap().grains.len() as f64).collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // E N_hit = gamma E Vol(B_{5+U}); Vol(B_r) = 2 pi (cosh r - 1)
        let oracle = p.gamma * 2.0 * std::f64::consts::PI * ((6f64.sinh() - 5f64.sinh()) - 1.0);
        assert!((space.ball_volume(5.0).unwrap() - 2.0 * std::f64::consts::PI * (5f64.cosh() - 1.0)).abs() < 1e-9);
        assert!((mean - oracle).abs() < 3.0 * (var / n as f64).sqrt(), "{mean} vs {oracle}");
    }

    #[test]
    fn coverage_probability() {
        let p = planar_default();
        let theory = 1.0 - empty_prob_point(&p).unwrap();
        let n = 10_000;
        let emp = empirical_coverage(&p, n, 77).unwrap();
        assert!((emp - theory).abs() <= 3.0 * (theory * (1.0 - theory) / n as f64).sqrt(), "{emp} vs {theory}");
    }

    #[test]
    fn coverage_is_stationary() {
        let p = planar_default();
        let mut rng = stream_rng(5, 0);
        let u = uniform_direction(&mut rng, 2);
        let x = crate::hypcore::exp_origin(&u[..2], 2.5);
        let n = 4000;
        let at_x = empirical_coverage_at(&p, &x, n, 1234).unwrap();
        let at_p = empirical_coverage(&p, n, 4321).unwrap();
        let pr = 0.5 * (at_x + at_p);
        let se = (2.0 * pr * (1.0 - pr) / n as f64).sqrt();
        assert!((at_x - at_p).abs() < 3.0 * se);
    }

    #[test]
    fn dump_format() {
        let p = planar_default();
        let real = sample_realization(&p, 2.0, 3).unwrap();
        let text = real.dump();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), real.grains.len());
        assert_eq!(rows[0].split_whitespace().count(), 3);
    }
}
