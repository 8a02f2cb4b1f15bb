//! Numerical checks of the principal kinematic formulas for pairs of balls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypcore::Space;
use crate::quadrature::Integrator;

use super::lens::{lens_surface, lens_volume};
use super::ball_v0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicReport {
    pub d: usize,
    pub k: usize,
    pub r_a: f64,
    pub r_b: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

/// `int V_k^0(B(p, r_a) ∩ g B(p, r_b)) dg` by quadrature over the distance
/// of the centers, against `sum_{i+j=d+k} V_i^0(B_{r_a}) V_j^0(B_{r_b})`.
pub fn kinematic_check(space: &Space, k: usize, r_a: f64, r_b: f64) -> Result<KinematicReport> {
    let d = space.dim();
    let supported = k == d || k + 1 == d || (d == 2 && k <= 2);
    if !supported {
        return Err(Error::Unsupported(format!("kinematic check for k = {k} in dimension {d}")));
    }
    if !(r_a > 0.0 && r_b > 0.0) {
        return Err(Error::DegenerateInput(format!("radii {r_a}, {r_b} must be positive")));
    }
    let p = d as i32 - 1;
    let two_pi = 2.0 * std::f64::consts::PI;
    let phi = |s: f64| -> Result<f64> {
        if k == d {
            lens_volume(space, r_a, r_b, s)
        } else if k + 1 == d {
            lens_surface(space, r_a, r_b, s)
        } else {
            // d = 2, k = 0: V_0 = 2 pi chi + V_2 with chi = 1 for a nonempty lens
            Ok(if s < r_a + r_b { two_pi + lens_volume(space, r_a, r_b, s)? } else { 0.0 })
        }
    };
    let mut err = None;
    let q = Integrator::new()
        .abs_tol(0.0)
        .rel_tol(1e-11)
        .breakpoints(&[(r_a - r_b).abs()])
        .integrate(
            |s| match phi(s) {
                Ok(v) => v * s.sinh().powi(p),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            r_a + r_b,
        )?;
    if let Some(e) = err {
        return Err(e);
    }
    let lhs = space.renorm_const(k) * space.omega_d() * q.value;
    let (a, b) = (ball_v0(space, r_a)?, ball_v0(space, r_b)?);
    let rhs: f64 = (k..=d).map(|i| a[i] * b[d + k - i]).sum();
    Ok(KinematicReport { d, k, r_a, r_b, lhs, rhs, rel_error: ((lhs - rhs) / rhs).abs() })
}

/// `(2 / omega_{d+1}) sum_l (-1)^l V_{2l}^0(B_r)`, which equals `chi(B_r) = 1`.
pub fn euler_relation_ball(space: &Space, r: f64) -> Result<f64> {
    let v0 = ball_v0(space, r)?;
    let d = space.dim();
    let sum: f64 = (0..=d / 2).map(|l| if l % 2 == 0 { v0[2 * l] } else { -v0[2 * l] }).sum();
    Ok(2.0 / space.omega(d + 1) * sum)
}
