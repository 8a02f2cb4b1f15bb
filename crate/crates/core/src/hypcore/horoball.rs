use crate::error::{domain, Result};
use crate::quadrature::Integrator;

use super::Space;

/// `P(z in B_{U,T})` for `dist(p, z) = s`, with `U` uniform on the unit sphere
/// and `-T ~ Exp(d - 1)`.
///
/// Conditional on the angle `theta` between `U` and the direction of `z` the
/// probability is `min(1, e^{-(d-1) b})` with `b = ln(cosh s - sinh s cos theta)`;
/// the angle is integrated against `sin^{d-2}`.
pub fn horoball_hit_prob(space: &Space, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(domain("distance", s));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let d = space.dim();
    let p = d as i32 - 1;
    // b <= 0 exactly when cos(theta) >= tanh(s/2)
    let kink = (0.5 * s).tanh().acos();
    let inside = space.cap_fraction((0.5 * s).tanh());
    let (sh, es) = (s.sinh(), (-s).exp());
    let weight = |theta: f64| {
        let h = (0.5 * theta).sin();
        let base = es + 2.0 * sh * h * h;
        base.powi(-p) * theta.sin().powi(d as i32 - 2)
    };
    let norm = std::f64::consts::PI.sqrt() * statrs::function::gamma::gamma(0.5 * (d as f64 - 1.0))
        / statrs::function::gamma::gamma(0.5 * d as f64);
    let tail = Integrator::new().abs_tol(1e-14).integrate(weight, kink, std::f64::consts::PI)?.value;
    Ok((inside + tail / norm).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn certain_at_base_point() {
        for d in 2..=5 {
            assert_eq!(horoball_hit_prob(&Space::new(d).unwrap(), 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn negative_distance_rejected() {
        assert!(horoball_hit_prob(&Space::new(2).unwrap(), -1.0).is_err());
    }

    #[test]
    fn planar_closed_form() {
        // d = 2: int dtheta / (cosh s - sinh s cos theta) = 2 atan(e^s tan(theta/2))
        let space = Space::new(2).unwrap();
        for s in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let k = (0.5f64 * s).tanh().acos();
            let oracle = k / PI + (PI - 2.0 * (s.exp() * (0.5 * k).tan()).atan()) / PI;
            let v = horoball_hit_prob(&space, s).unwrap();
            assert!((v - oracle).abs() < 1e-12, "s={s}: {v} vs {oracle}");
        }
    }

    #[test]
    fn decreasing_in_distance() {
        for d in 2..=4 {
            let space = Space::new(d).unwrap();
            let mut prev = 1.0;
            for i in 1..40 {
                let v = horoball_hit_prob(&space, 0.25 * i as f64).unwrap();
                assert!(v < prev && v > 0.0);
                prev = v;
            }
        }
    }
}
