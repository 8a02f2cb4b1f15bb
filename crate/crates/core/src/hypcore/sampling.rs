//! Uniform sampling in geodesic balls via polar coordinates.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::quadrature::Integrator;

use super::point::{exp_origin, translate, Point};
use super::{Space, MAX_DIM};

const TABLE_CELLS: usize = 4096;

/// Uniformly distributed unit vector in `R^d`.
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> [f64; MAX_DIM] {
    let mut u = [0.0; MAX_DIM];
    loop {
        let mut n2: f64 = 0.0;
        for v in u.iter_mut().take(d) {
            *v = rng.sample::<f64, _>(StandardNormal);
            n2 += *v * *v;
        }
        if n2 > 1e-24 {
            let n = n2.sqrt();
            for v in u.iter_mut().take(d) {
                *v /= n;
            }
            return u;
        }
    }
}

#[derive(Debug, Clone)]
enum Radial {
    /// `cosh s = 1 + V (cosh R - 1)`.
    Plane { cosh_r_minus_one: f64 },
    /// Exact cell masses on a uniform grid, then rejection inside the cell.
    Table { cell: f64, cumulative: Vec<f64>, power: i32 },
}

/// Samples the radius of a uniform point in `B_R`, density proportional to
/// `sinh^{d-1}(s)` on `[0, R]`.
#[derive(Debug, Clone)]
pub struct RadialSampler {
    space: Space,
    radius: f64,
    kind: Radial,
}

impl RadialSampler {
    pub fn new(space: Space, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(domain("sampling radius", radius));
        }
        let kind = if space.dim() == 2 {
            let h = (0.5 * radius).sinh();
            Radial::Plane { cosh_r_minus_one: 2.0 * h * h }
        } else {
            let power = space.dim() as i32 - 1;
            let cell = radius / TABLE_CELLS as f64;
            let integrator = Integrator::new().abs_tol(0.0).rel_tol(1e-14);
            let mut cumulative = Vec::with_capacity(TABLE_CELLS + 1);
            cumulative.push(0.0);
            let mut acc = 0.0;
            for k in 0..TABLE_CELLS {
                let a = k as f64 * cell;
                acc += integrator.integrate(|s: f64| s.sinh().powi(power), a, a + cell)?.value;
                cumulative.push(acc);
            }
            Radial::Table { cell, cumulative, power }
        };
        Ok(Self { space, radius, kind })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            Radial::Plane { cosh_r_minus_one } => {
                let x = rng.random::<f64>() * cosh_r_minus_one;
                // acosh(1 + x) without cancellation for small x
                (x + (x * (x + 2.0)).sqrt()).ln_1p()
            }
            Radial::Table { cell, cumulative, power } => {
                let total = *cumulative.last().expect("non-empty table");
                let target = rng.random::<f64>() * total;
                let k = cumulative.partition_point(|&c| c <= target).clamp(1, TABLE_CELLS) - 1;
                let a = k as f64 * cell;
                let b = a + cell;
                let top = b.sinh().powi(*power);
                loop {
                    let s = a + rng.random::<f64>() * cell;
                    if rng.random::<f64>() * top <= s.sinh().powi(*power) {
                        return s;
                    }
                }
            }
        }
    }

    /// A uniformly distributed point of `B_R`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let s = self.sample_radius(rng);
        let u = uniform_direction(rng, self.space.dim());
        exp_origin(&u[..self.space.dim()], s)
    }

    /// Exact radial CDF `int_0^s sinh^{d-1} / int_0^R sinh^{d-1}`.
    pub fn radial_cdf(&self, s: f64) -> Result<f64> {
        let s = s.clamp(0.0, self.radius);
        Ok(self.space.ball_volume(s)? / self.space.ball_volume(self.radius)?)
    }
}

impl Space {
    /// Uniform point in `B_R`. Builds a sampler per call; reuse a
    /// [`RadialSampler`] in loops.
    pub fn sample_uniform_ball<R: Rng + ?Sized>(&self, rng: &mut R, radius: f64) -> Result<Point> {
        Ok(RadialSampler::new(*self, radius)?.sample(rng))
    }

    /// Uniform point on the sphere of radius `r` around `center`.
    pub fn sample_sphere<R: Rng + ?Sized>(&self, rng: &mut R, center: &Point, r: f64) -> Point {
        let u = uniform_direction(rng, self.dim());
        let local = exp_origin(&u[..self.dim()], r);
        translate(center, &local)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypcore::dist;
    use crate::rng::stream_rng;

    fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn planar_radius_matches_closed_form_cdf() {
        let space = Space::new(2).unwrap();
        let r = 3.0;
        let sampler = RadialSampler::new(space, r).unwrap();
        let mut rng = stream_rng(1, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| sampler.sample_radius(&mut rng)).collect();
        assert!(xs.iter().all(|&s| (0.0..=r).contains(&s)));
        let d = ks_statistic(xs, |s| (s.cosh() - 1.0) / (r.cosh() - 1.0));
        // 1% critical value of the KS statistic ~ 1.63 / sqrt(n)
        assert!(d < 1.63 / (20_000f64).sqrt(), "KS = {d}");
    }

    #[test]
    fn tabulated_radius_matches_cdf() {
        for d in [3, 4] {
            let space = Space::new(d).unwrap();
            let sampler = RadialSampler::new(space, 2.5).unwrap();
            let mut rng = stream_rng(2, d as u64);
            let xs: Vec<f64> = (0..20_000).map(|_| sampler.sample_radius(&mut rng)).collect();
            let stat = ks_statistic(xs, |s| sampler.radial_cdf(s).unwrap());
            assert!(stat < 1.63 / (20_000f64).sqrt(), "d={d} KS = {stat}");
        }
    }

    #[test]
    fn sub_ball_fraction() {
        let space = Space::new(2).unwrap();
        let r = 4.0;
        let sampler = RadialSampler::new(space, r).unwrap();
        let mut rng = stream_rng(3, 0);
        let n = 100_000;
        let hits = (0..n).filter(|_| sampler.sample(&mut rng).norm() <= r / 2.0).count();
        let p = space.ball_volume(r / 2.0).unwrap() / space.ball_volume(r).unwrap();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn directions_are_symmetric() {
        let space = Space::new(3).unwrap();
        let sampler = RadialSampler::new(space, 1.0).unwrap();
        let mut rng = stream_rng(4, 0);
        let n = 60_000;
        // counts in the 2^3 orthants; chi-square with 7 dof, 0.1% critical value 24.3
        let mut counts = [0usize; 8];
        for _ in 0..n {
            let p = sampler.sample(&mut rng);
            let idx = p.spatial().iter().enumerate().fold(0, |acc, (i, &v)| acc | (usize::from(v > 0.0) << i));
            counts[idx] += 1;
        }
        let e = n as f64 / 8.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 24.3, "chi2 = {chi2}");
    }

    #[test]
    fn sphere_samples_at_radius() {
        let space = Space::new(3).unwrap();
        let mut rng = stream_rng(5, 0);
        let c = space.sample_uniform_ball(&mut rng, 4.0).unwrap();
        for _ in 0..1000 {
            let y = space.sample_sphere(&mut rng, &c, 0.8);
            assert!((dist(&c, &y).unwrap() - 0.8).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_sampling_radius() {
        assert!(RadialSampler::new(Space::new(2).unwrap(), 0.0).is_err());
    }
}
