//! Variance of the covered volume and the surface–volume covariance.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::hypcore::{busemann_spatial, dist, exp_origin, horoball_hit_prob, uniform_direction, RadialSampler, Space};
use crate::process::{ModelParams, RadiusDistribution};
use crate::quadrature::Integrator;
use crate::rng::{stream, stream_rng};

use super::interp::MonotoneCubic;
use super::lens::{covariogram, lens_volume, window_lens_table, CovariogramTable};
use super::{grain_moments, GrainMoments};

const WINDOW_TABLE_POINTS: usize = 1025;

/// A Monte Carlo backed covariance with its three terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub value: f64,
    pub std_error: f64,
    pub terms: [f64; 3],
    pub term_std_errors: [f64; 3],
    pub n_mc: usize,
    /// Set when the standard error exceeds the requested fraction of `|value|`.
    pub precision_warning: bool,
}

/// Model parameters together with their grain moments and covariogram.
#[derive(Debug, Clone)]
pub struct Theory {
    params: ModelParams,
    space: Space,
    gm: GrainMoments,
    cov: CovariogramTable,
}

impl Theory {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let gm = grain_moments(params)?;
        let cov = covariogram(params)?;
        Ok(Self { params: *params, space: params.space(), gm, cov })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn moments(&self) -> &GrainMoments {
        &self.gm
    }

    pub fn covariogram(&self) -> &CovariogramTable {
        &self.cov
    }

    fn gamma(&self) -> f64 {
        self.params.gamma
    }

    fn vd(&self) -> f64 {
        self.gm.v[self.params.d]
    }

    /// `e^{-2 gamma v_d} omega_d int_0^{2 r_max} (e^{gamma C(s)} - 1) w(s) sinh^{d-1}(s) ds`.
    fn radial_integral<W: FnMut(f64) -> Result<f64>>(&self, mut weight: W) -> Result<f64> {
        let g = self.gamma();
        if g == 0.0 {
            return Ok(0.0);
        }
        let p = self.space.dim() as i32 - 1;
        let mut err = None;
        let q = Integrator::new().abs_tol(1e-12).rel_tol(1e-10).integrate(
            |s| {
                let w = match weight(s) {
                    Ok(w) => w,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                };
                (g * self.cov.eval(s)).exp_m1() * w * s.sinh().powi(p)
            },
            0.0,
            self.cov.support(),
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok((-2.0 * g * self.vd()).exp() * self.space.omega_d() * q.value)
    }

    /// `Var V_d(Z ∩ B_R)`.
    pub fn var_volume_exact(&self, window: f64) -> Result<f64> {
        if !(window > 0.0) {
            return Err(domain("window radius", window));
        }
        self.radial_integral(|s| lens_volume(&self.space, window, window, s))
    }

    /// `lim Var V_d(Z ∩ B_R) / Vol(B_R)`.
    pub fn var_volume_asymptotic(&self) -> Result<f64> {
        self.radial_integral(|s| horoball_hit_prob(&self.space, s))
    }

    /// The asymptotic variance integral without the horoball factor.
    pub fn var_volume_no_horoball(&self) -> Result<f64> {
        self.radial_integral(|_| Ok(1.0))
    }

    /// `int (e^{gamma C} - 1) 1{z in W} C_{d-1}(W, dy) dz` for `W = B_R`, times `e^{-2 gamma v_d}`.
    pub fn boundary_term_local(&self, window: f64) -> Result<f64> {
        let coth = 1.0 / window.tanh();
        let area = self.space.sphere_area(window)?;
        Ok(area * self.radial_integral(|s| Ok(self.space.cap_fraction(coth * (0.5 * s).tanh())))?)
    }

    /// `(d-1) e^{-2 gamma v_d} int (e^{gamma C(p,z)} - 1) 1{z in B_{u,0}} dz`.
    pub fn boundary_term_asymptotic(&self) -> Result<f64> {
        let d1 = (self.space.dim() - 1) as f64;
        Ok(d1 * self.radial_integral(|s| Ok(self.space.cap_fraction((0.5 * s).tanh())))?)
    }

    /// Draws `(weight, y, z)` from `M_{d-1,d}`: radius `U` stratified over
    /// the radius law, `y` on the sphere of radius `U`, `z` in the ball.
    fn sample_pair_weights<F>(&self, n: usize, seed: u64, mut eval: F) -> Result<(f64, f64)>
    where
        F: FnMut(&mut crate::rng::StreamRng, &crate::hypcore::Point, &crate::hypcore::Point) -> Result<f64>,
    {
        let d = self.space.dim();
        let mut rng = stream_rng(seed, stream::AUX);
        let r_max = self.params.radius.r_max();
        let sampler = RadialSampler::new(self.space, r_max)?;
        let ball_max = self.space.ball_volume(r_max)?;
        let mut e1 = [0.0; crate::hypcore::MAX_DIM];
        e1[0] = 1.0;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for i in 0..n {
            let u = self.params.radius.quantile((i as f64 + rng.random::<f64>()) / n as f64);
            let y = exp_origin(&e1[..d], u);
            let z = sampler.sample(&mut rng);
            let w = match self.params.radius {
                RadiusDistribution::Fixed { .. } => self.space.sphere_area(u)? * ball_max,
                RadiusDistribution::Uniform { .. } => {
                    if z.norm() > u {
                        0.0
                    } else {
                        self.space.sphere_area(u)? * ball_max
                    }
                }
            };
            let f = if w > 0.0 { w * eval(&mut rng, &y, &z)? } else { 0.0 };
            sum += f;
            sum2 += f * f;
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum2 / nf - mean * mean) * nf / (nf - 1.0).max(1.0)).max(0.0);
        Ok((mean, (var / nf).sqrt()))
    }

    /// `Cov(V_{d-1}(Z ∩ B_R), V_d(Z ∩ B_R))` with the middle term by Monte Carlo.
    pub fn cov_surf_vol_local(&self, window: f64, n_mc: usize, seed: u64) -> Result<CovarianceEstimate> {
        let g = self.gamma();
        let d = self.params.d;
        let t1 = -g * self.gm.v[d - 1] * self.var_volume_exact(window)?;
        let t3 = self.boundary_term_local(window)?;
        let lens_w: MonotoneCubic = window_lens_table(&self.space, window, self.cov.support(), WINDOW_TABLE_POINTS)?;
        let pref = g * (-2.0 * g * self.vd()).exp();
        let (m, se) = if g == 0.0 {
            (0.0, 0.0)
        } else {
            self.sample_pair_weights(n_mc.max(2), seed, |_, y, z| {
                let s = dist(y, z)?;
                Ok((g * self.cov.eval(s)).exp() * lens_w.eval(s))
            })?
        };
        Ok(finish([t1, pref * m, t3], [0.0, pref * se, 0.0], n_mc))
    }

    /// Limit of `Cov(V_{d-1}, V_d) / Vol(B_R)`; the horoball pair weight in
    /// the middle term is sampled through the horoball direction.
    pub fn cov_surf_vol_asymptotic(&self, n_mc: usize, seed: u64) -> Result<CovarianceEstimate> {
        let g = self.gamma();
        let d = self.params.d;
        let t1 = -g * self.gm.v[d - 1] * self.var_volume_asymptotic()?;
        let t3 = self.boundary_term_asymptotic()?;
        let pref = g * (-2.0 * g * self.vd()).exp();
        let p = (d - 1) as f64;
        let (m, se) = if g == 0.0 {
            (0.0, 0.0)
        } else {
            self.sample_pair_weights(n_mc.max(2), seed, |rng, y, z| {
                let u = uniform_direction(rng, d);
                let b = busemann_spatial(y, &u[..d]).max(busemann_spatial(z, &u[..d]));
                Ok((g * self.cov.eval(dist(y, z)?)).exp() * (-p * b).exp())
            })?
        };
        Ok(finish([t1, pref * m, t3], [0.0, pref * se, 0.0], n_mc))
    }

    /// Repeats [`cov_surf_vol_local`](Self::cov_surf_vol_local) with doubled
    /// sample sizes until the standard error is at most `rel` of the value.
    pub fn cov_surf_vol_local_to(&self, window: f64, rel: f64, n_start: usize, n_max: usize, seed: u64) -> Result<CovarianceEstimate> {
        let mut n = n_start.max(2);
        loop {
            let mut est = self.cov_surf_vol_local(window, n, seed)?;
            est.precision_warning = est.std_error > rel * est.value.abs();
            if !est.precision_warning || n >= n_max {
                return Ok(est);
            }
            n = (2 * n).min(n_max);
        }
    }

    pub fn cov_surf_vol_asymptotic_to(&self, rel: f64, n_start: usize, n_max: usize, seed: u64) -> Result<CovarianceEstimate> {
        let mut n = n_start.max(2);
        loop {
            let mut est = self.cov_surf_vol_asymptotic(n, seed)?;
            est.precision_warning = est.std_error > rel * est.value.abs();
            if !est.precision_warning || n >= n_max {
                return Ok(est);
            }
            n = (2 * n).min(n_max);
        }
    }
}

fn finish(terms: [f64; 3], ses: [f64; 3], n: usize) -> CovarianceEstimate {
    let value = terms.iter().sum::<f64>();
    let std_error = ses.iter().map(|s| s * s).sum::<f64>().sqrt();
    CovarianceEstimate {
        value,
        std_error,
        terms,
        term_std_errors: ses,
        n_mc: n,
        precision_warning: std_error > 0.1 * value.abs(),
    }
}
