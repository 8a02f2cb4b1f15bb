//! Volumes, areas and intrinsic volumes of geodesic balls.

use statrs::function::beta::beta_reg;

use crate::error::{domain, Error, Result};
use crate::quadrature::integrate;

use super::Space;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Space {
    /// Volume of a ball of radius `r`: `omega_d * int_0^r sinh^{d-1}`.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(domain("radius", r));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        if self.d == 2 {
            let h = (0.5 * r).sinh();
            return Ok(4.0 * std::f64::consts::PI * h * h);
        }
        let p = (self.d - 1) as i32;
        Ok(self.omega_d() * integrate(|s: f64| s.sinh().powi(p), 0.0, r)?)
    }

    /// Area of a sphere of radius `r`.
    pub fn sphere_area(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(domain("radius", r));
        }
        Ok(self.omega_d() * r.sinh().powi(self.d as i32 - 1))
    }

    /// `V_j` of a ball: `omega_d cosh^{d-1-j}(r) sinh^j(r)` for `j < d`, the volume for `j = d`.
    pub fn intrinsic_volume_ball(&self, j: usize, r: f64) -> Result<f64> {
        if j > self.d {
            return Err(Error::Index { index: j, max: self.d });
        }
        if !(r >= 0.0) {
            return Err(domain("radius", r));
        }
        if j == self.d {
            return self.ball_volume(r);
        }
        Ok(self.omega_d() * r.cosh().powi((self.d - 1 - j) as i32) * r.sinh().powi(j as i32))
    }

    /// Steiner coefficient `l_{d,j}(r) = C(d-1, j) int_0^r cosh^j sinh^{d-1-j}`.
    pub fn steiner_coeff(&self, j: usize, r: f64) -> Result<f64> {
        if j >= self.d {
            return Err(Error::Index { index: j, max: self.d - 1 });
        }
        if !(r >= 0.0) {
            return Err(domain("radius", r));
        }
        let (a, b) = (j as i32, (self.d - 1 - j) as i32);
        let integral = integrate(|t: f64| t.cosh().powi(a) * t.sinh().powi(b), 0.0, r)?;
        Ok(binomial(self.d - 1, j) * integral)
    }

    /// Factor turning `V_k` into the renormalized `V_k^0`; equal to one for `k = d`.
    pub fn renorm_const(&self, k: usize) -> f64 {
        assert!(k <= self.d, "index {k} exceeds dimension {}", self.d);
        if k == self.d {
            return 1.0;
        }
        let d = self.d;
        self.omega(d + 1) / (self.omega(k + 1) * self.omega(d - k)) * binomial(d - 1, k)
    }

    /// Normalized measure of `{u in S^{d-1} : <u, e> >= c}`.
    pub fn cap_fraction(&self, c: f64) -> f64 {
        if c >= 1.0 {
            return 0.0;
        }
        if c <= -1.0 {
            return 1.0;
        }
        match self.d {
            2 => c.acos() / std::f64::consts::PI,
            3 => 0.5 * (1.0 - c),
            _ => {
                let a = 0.5 * (self.d as f64 - 1.0);
                beta_reg(a, a, 0.5 * (1.0 - c))
            }
        }
    }
}
