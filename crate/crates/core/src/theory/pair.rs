//! The horoball measure of the horoballs containing two given points.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hypcore::{busemann_spatial, uniform_direction, Point, MAX_DIM};
use crate::quadrature::Integrator;

use std::f64::consts::PI;

/// Orthonormal `e1`, `e2` with `span{a, b} ⊆ span{e1, e2}`, and a unit
/// vector orthogonal to both when `d >= 3`.
fn plane_basis(a: &[f64], b: &[f64]) -> ([f64; MAX_DIM], [f64; MAX_DIM], [f64; MAX_DIM]) {
    let d = a.len();
    let mut basis: Vec<[f64; MAX_DIM]> = Vec::with_capacity(3);
    let mut candidates: Vec<[f64; MAX_DIM]> = Vec::new();
    for v in [a, b] {
        let mut c = [0.0; MAX_DIM];
        c[..d].copy_from_slice(v);
        candidates.push(c);
    }
    for i in 0..d {
        let mut c = [0.0; MAX_DIM];
        c[i] = 1.0;
        candidates.push(c);
    }
    for c in candidates {
        let mut v = c;
        for e in &basis {
            let dot: f64 = (0..d).map(|i| v[i] * e[i]).sum();
            for i in 0..d {
                v[i] -= dot * e[i];
            }
        }
        let n = (0..d).map(|i| v[i] * v[i]).sum::<f64>().sqrt();
        let scale = (0..d).map(|i| c[i] * c[i]).sum::<f64>().sqrt();
        if n > 1e-10 * scale.max(1e-300) && n > 0.0 {
            for x in v.iter_mut().take(d) {
                *x /= n;
            }
            basis.push(v);
            if basis.len() == 3.min(d) {
                break;
            }
        }
    }
    let w = if d >= 3 { basis[2] } else { [0.0; MAX_DIM] };
    (basis[0], basis[1], w)
}

/// `mu_hb({B : y, z in B}) = E_U exp(-(d-1) max(b_U(y), b_U(z)))`, the
/// offset integral done in closed form and the direction by quadrature.
pub fn horoball_pair_weight(y: &Point, z: &Point) -> Result<f64> {
    if y.dim() != z.dim() {
        return Err(Error::InvalidPoint(format!("dimension mismatch {} vs {}", y.dim(), z.dim())));
    }
    let d = y.dim();
    let p = (d - 1) as i32;
    let (e1, e2, w) = plane_basis(y.spatial(), z.spatial());
    let proj = |v: &[f64], e: &[f64; MAX_DIM]| (0..d).map(|i| v[i] * e[i]).sum::<f64>();
    // kinks where b_u(y) = b_u(z), i.e. (ys - zs).u = y0 - z0
    let a: Vec<f64> = (0..d).map(|i| y.spatial()[i] - z.spatial()[i]).collect();
    let (a1, a2) = (proj(&a, &e1), proj(&a, &e2));
    let amod = a1.hypot(a2);
    let phi_a = a2.atan2(a1);
    let gap = y.time() - z.time();

    let inner = |sin_a: f64, cos_a: f64| -> Result<f64> {
        let mut breaks = Vec::new();
        if amod > 0.0 && sin_a > 0.0 {
            let c = gap / (amod * sin_a);
            if c.abs() <= 1.0 {
                let t = c.acos();
                for b in [phi_a + t, phi_a - t] {
                    breaks.push(b.rem_euclid(2.0 * PI));
                }
            }
        }
        let f = |phi: f64| {
            let (s, c) = phi.sin_cos();
            let mut u = [0.0; MAX_DIM];
            for i in 0..d {
                u[i] = sin_a * (c * e1[i] + s * e2[i]) + cos_a * w[i];
            }
            let b = busemann_spatial(y, &u[..d]).max(busemann_spatial(z, &u[..d]));
            (-(p as f64) * b).exp()
        };
        Ok(Integrator::new().abs_tol(1e-13).rel_tol(1e-12).breakpoints(&breaks).integrate(f, 0.0, 2.0 * PI)?.value)
    };

    if d == 2 {
        return Ok(inner(1.0, 0.0)? / (2.0 * PI));
    }
    // u = sin(alpha) (cos phi e1 + sin phi e2) + cos(alpha) w
    let mut breaks = Vec::new();
    if amod > 0.0 && gap.abs() < amod {
        breaks.push((gap.abs() / amod).asin());
    }
    let mut err = None;
    let q = Integrator::new().abs_tol(1e-12).rel_tol(1e-11).breakpoints(&breaks).integrate(
        |alpha| {
            let (s, c) = alpha.sin_cos();
            match inner(s, c) {
                Ok(v) => v * s * c.powi(d as i32 - 3),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        0.5 * PI,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((d - 2) as f64 / (2.0 * PI) * q.value)
}

/// Monte Carlo version of [`horoball_pair_weight`]: mean and standard error.
pub fn horoball_pair_weight_mc<R: Rng + ?Sized>(y: &Point, z: &Point, n: usize, rng: &mut R) -> (f64, f64) {
    let d = y.dim();
    let p = (d - 1) as f64;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let u = uniform_direction(rng, d);
        let b = busemann_spatial(y, &u[..d]).max(busemann_spatial(z, &u[..d]));
        let f = (-p * b).exp();
        sum += f;
        sum2 += f * f;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
    (mean, (var / nf).sqrt())
}
