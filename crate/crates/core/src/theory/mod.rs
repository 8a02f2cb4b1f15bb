//! Mean values, variances, covariances and integral-geometric identities.

mod interp;
mod kinematic;
mod lens;
mod pair;
mod variance;

pub use interp::MonotoneCubic;
pub use kinematic::{euler_relation_ball, kinematic_check, KinematicReport};
pub use lens::{covariogram, covariogram_with, lens_surface, lens_volume, mean_lens, CovariogramTable, COVARIOGRAM_POINTS};
pub use pair::{horoball_pair_weight, horoball_pair_weight_mc};
pub use variance::{CovarianceEstimate, Theory};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypcore::Space;
use crate::process::ModelParams;

/// Moments of the typical grain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrainMoments {
    pub d: usize,
    /// `v[j] = E V_j(G)` for `j = 0..=d`.
    pub v: Vec<f64>,
    /// Renormalized `v0[j] = renorm_const(j) v[j]`.
    pub v0: Vec<f64>,
    /// `E Vol(B(G, 1))^2`.
    pub vbar2: f64,
}

pub fn grain_moments(params: &ModelParams) -> Result<GrainMoments> {
    params.validate()?;
    let space = params.space();
    let d = params.d;
    let v = (0..=d)
        .map(|j| params.radius.try_expect(|r| space.intrinsic_volume_ball(j, r)))
        .collect::<Result<Vec<f64>>>()?;
    let v0 = (0..=d).map(|j| space.renorm_const(j) * v[j]).collect();
    let vbar2 = params.radius.try_expect(|r| space.ball_volume(r + 1.0).map(|x| x * x))?;
    Ok(GrainMoments { d, v, v0, vbar2 })
}

/// `E V_d(Z ∩ W) = V_d(W) (1 - e^{-gamma v_d})`.
pub fn mean_volume(w_vol: f64, gm: &GrainMoments, gamma: f64) -> f64 {
    w_vol * -(-gamma * gm.v[gm.d]).exp_m1()
}

/// `E V_{d-1}(Z ∩ W) = V_d(W) gamma v_{d-1} e^{-gamma v_d} + V_{d-1}(W) (1 - e^{-gamma v_d})`.
pub fn mean_surface(w_vol: f64, w_surf: f64, gm: &GrainMoments, gamma: f64) -> f64 {
    let d = gm.d;
    let e = (-gamma * gm.v[d]).exp();
    w_vol * gamma * gm.v[d - 1] * e + w_surf * -(-gamma * gm.v[d]).exp_m1()
}

/// Visits every `(m_1, .., m_s)` with entries in `lo..=hi` and sum `total`.
fn for_each_composition(s: usize, lo: usize, hi: usize, total: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(buf: &mut Vec<usize>, left: usize, s: usize, lo: usize, hi: usize, f: &mut impl FnMut(&[usize])) {
        if buf.len() == s {
            if left == 0 {
                f(buf);
            }
            return;
        }
        let remaining = s - buf.len() - 1;
        for m in lo..=hi {
            if m > left || left - m < remaining * lo || left - m > remaining * hi {
                continue;
            }
            buf.push(m);
            rec(buf, left - m, s, lo, hi, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(s);
    rec(&mut buf, total, s, lo, hi, f);
}

/// `sum_{s=1}^{m-k} (-1)^{s-1} gamma^s / s! sum v0_{m_1} .. v0_{m_s}` over
/// `m_i in k..=d-1` with `m_1 + .. + m_s = s d + k - m`.
fn series_coeff(k: usize, m: usize, gm: &GrainMoments, gamma: f64) -> f64 {
    let d = gm.d;
    let mut total = 0.0;
    let mut factorial = 1.0;
    for s in 1..=m - k {
        factorial *= s as f64;
        let target = s * d + k - m;
        let mut inner = 0.0;
        for_each_composition(s, k, d - 1, target, &mut |ms| {
            inner += ms.iter().map(|&i| gm.v0[i]).product::<f64>();
        });
        let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * gamma.powi(s as i32) / factorial * inner;
    }
    total
}

/// `E V_k^0(Z ∩ W)` from the renormalized intrinsic volumes `w_v0[m] = V_m^0(W)`.
pub fn mean_intrinsic_k0(k: usize, w_v0: &[f64], gm: &GrainMoments, gamma: f64) -> Result<f64> {
    let d = gm.d;
    if k >= d {
        return Err(Error::Index { index: k, max: d - 1 });
    }
    if w_v0.len() != d + 1 {
        return Err(Error::InvalidPoint(format!("expected {} window values, got {}", d + 1, w_v0.len())));
    }
    let e = (-gamma * gm.v[d]).exp();
    let mut value = w_v0[k] * -(-gamma * gm.v[d]).exp_m1();
    for m in k + 1..=d {
        value += e * w_v0[m] * series_coeff(k, m, gm, gamma);
    }
    Ok(value)
}

/// `lim E V_k(Z ∩ B_R) / Vol(B_R)`.
pub fn asymptotic_density_k(k: usize, gm: &GrainMoments, gamma: f64) -> Result<f64> {
    let d = gm.d;
    if k >= d {
        return Err(Error::Index { index: k, max: d - 1 });
    }
    let space = Space::new(d)?;
    let kk = |i: usize| space.kappa(i);
    let e = (-gamma * gm.v[d]).exp();
    let mut value = (d - 1) as f64 * -(-gamma * gm.v[d]).exp_m1();
    for m in k + 1..=d {
        let b = if m < d {
            (d - 1) as f64 * kk(m) * kk(d - 1 - m) / (kk(k) * kk(d - 1 - k))
        } else {
            d as f64 / std::f64::consts::PI * kk(d) / (kk(k) * kk(d - 1 - k))
        };
        value += e * b * series_coeff(k, m, gm, gamma);
    }
    Ok(value)
}

/// `E chi(Z ∩ W)` in the plane from `V_1(W)`, `V_2(W)`.
pub fn mean_euler_2d(w_v1: f64, w_v2: f64, gm: &GrainMoments, gamma: f64) -> Result<f64> {
    if gm.d != 2 {
        return Err(Error::Unsupported(format!("Euler characteristic mean needs d = 2, got {}", gm.d)));
    }
    let pi = std::f64::consts::PI;
    let (v1, v2) = (gm.v[1], gm.v[2]);
    let e = (-gamma * v2).exp();
    Ok(-(-gamma * v2).exp_m1()
        + w_v1 * e * gamma * v1 / (2.0 * pi)
        + w_v2 * e * (gamma + gamma * v2 / (2.0 * pi) - (gamma * v1).powi(2) / (4.0 * pi)))
}

/// `V_m^0(B_R)` for `m = 0..=d`.
pub fn ball_v0(space: &Space, r: f64) -> Result<Vec<f64>> {
    (0..=space.dim()).map(|m| Ok(space.renorm_const(m) * space.intrinsic_volume_ball(m, r)?)).collect()
}
