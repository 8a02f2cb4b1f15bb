use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::point::{minkowski, Point};
use super::MAX_DIM;

const ISOMETRY_TOL: f64 = 1e-8;
/// Compositions after which the matrix is re-orthonormalized.
const RENORM_EVERY: u32 = 32;

type Mat = [[f64; MAX_DIM + 1]; MAX_DIM + 1];

/// An orientation-of-time preserving Lorentz matrix acting on the hyperboloid.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Isometry {
    dim: usize,
    m: Mat,
    depth: u32,
}

impl Isometry {
    pub fn identity(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        let mut m = [[0.0; MAX_DIM + 1]; MAX_DIM + 1];
        for (i, row) in m.iter_mut().enumerate().take(dim + 1) {
            row[i] = 1.0;
        }
        Self { dim, m, depth: 0 }
    }

    /// Validates `M^T J M = J` and `M00 >= 1`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 || n > MAX_DIM + 1 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvariantViolation(format!("matrix must be square of size 2..={}", MAX_DIM + 1)));
        }
        let mut m = [[0.0; MAX_DIM + 1]; MAX_DIM + 1];
        for (i, r) in rows.iter().enumerate() {
            m[i][..n].copy_from_slice(r);
        }
        let iso = Self { dim: n - 1, m, depth: 0 };
        iso.check()?;
        Ok(iso)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn check(&self) -> Result<()> {
        let n = self.dim + 1;
        let scale = self.m[0][0].abs().max(1.0);
        for i in 0..n {
            for j in 0..n {
                let col_i: Vec<f64> = (0..n).map(|k| self.m[k][i]).collect();
                let col_j: Vec<f64> = (0..n).map(|k| self.m[k][j]).collect();
                let g = minkowski(&col_i, &col_j);
                let target = if i != j { 0.0 } else if i == 0 { -1.0 } else { 1.0 };
                if (g - target).abs() > ISOMETRY_TOL * scale * scale {
                    return Err(Error::InvariantViolation(format!("(M^T J M)[{i}][{j}] = {g}, expected {target}")));
                }
            }
        }
        if self.m[0][0] < 1.0 - ISOMETRY_TOL {
            return Err(Error::InvariantViolation(format!("M00 = {} < 1", self.m[0][0])));
        }
        Ok(())
    }

    /// Hyperbolic translation along the geodesic from the base point to `x`;
    /// maps the base point to `x`.
    pub fn translation_to(x: &Point) -> Self {
        let dim = x.dim();
        let mut m = Self::identity(dim).m;
        let x0 = x.time();
        let xs = x.spatial();
        m[0][0] = x0;
        for i in 0..dim {
            m[0][i + 1] = xs[i];
            m[i + 1][0] = xs[i];
            for j in 0..dim {
                m[i + 1][j + 1] += xs[i] * xs[j] / (1.0 + x0);
            }
        }
        Self { dim, m, depth: 0 }
    }

    /// Haar-distributed element of the stabilizer of the base point (a random
    /// orthogonal transformation of the spatial coordinates).
    pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        let mut q = [[0.0; MAX_DIM]; MAX_DIM];
        // Gram-Schmidt on Gaussian columns gives a Haar orthogonal matrix.
        loop {
            let mut ok = true;
            for j in 0..dim {
                let mut v = [0.0; MAX_DIM];
                for x in v.iter_mut().take(dim) {
                    *x = rng.sample(StandardNormal);
                }
                for k in 0..j {
                    let dot: f64 = (0..dim).map(|i| v[i] * q[i][k]).sum();
                    for (i, x) in v.iter_mut().enumerate().take(dim) {
                        *x -= dot * q[i][k];
                    }
                }
                let n = v[..dim].iter().map(|a| a * a).sum::<f64>().sqrt();
                if n < 1e-8 {
                    ok = false;
                    break;
                }
                for i in 0..dim {
                    q[i][j] = v[i] / n;
                }
            }
            if ok {
                break;
            }
        }
        let mut iso = Self::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                iso.m[i + 1][j + 1] = q[i][j];
            }
        }
        iso
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::InvariantViolation(format!("dimension mismatch {} vs {}", self.dim, other.dim)));
        }
        let n = self.dim + 1;
        let mut m = [[0.0; MAX_DIM + 1]; MAX_DIM + 1];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = (0..n).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        let mut out = Self { dim: self.dim, m, depth: self.depth.max(other.depth) + 1 };
        if out.depth >= RENORM_EVERY {
            out.reorthonormalize()?;
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Self {
        // M^{-1} = J M^T J
        let n = self.dim + 1;
        let mut m = [[0.0; MAX_DIM + 1]; MAX_DIM + 1];
        for i in 0..n {
            for j in 0..n {
                let sign = if (i == 0) ^ (j == 0) { -1.0 } else { 1.0 };
                m[i][j] = sign * self.m[j][i];
            }
        }
        Self { dim: self.dim, m, depth: self.depth }
    }

    pub fn apply(&self, x: &Point) -> Point {
        debug_assert_eq!(x.dim(), self.dim);
        let n = self.dim + 1;
        let xr = x.raw();
        let mut y = [0.0; MAX_DIM + 1];
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            *yi = (0..n).map(|k| self.m[i][k] * xr[k]).sum();
        }
        let mut p = Point::from_raw(self.dim, y);
        p.renormalize();
        p
    }

    /// Lorentzian Gram–Schmidt on the columns to remove accumulated drift.
    fn reorthonormalize(&mut self) -> Result<()> {
        let n = self.dim + 1;
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| self.m[i][j]).collect()).collect();
        for j in 0..n {
            for k in 0..j {
                let sign = if k == 0 { -1.0 } else { 1.0 };
                let proj = minkowski(&cols[j], &cols[k]) * sign;
                let ck = cols[k].clone();
                for (a, b) in cols[j].iter_mut().zip(&ck) {
                    *a -= proj * b;
                }
            }
            let norm2 = minkowski(&cols[j], &cols[j]);
            let expected_sign = if j == 0 { -1.0 } else { 1.0 };
            if norm2 * expected_sign <= 0.0 {
                return Err(Error::InvariantViolation("degenerate matrix during re-orthonormalization".into()));
            }
            let norm = (norm2 * expected_sign).sqrt();
            for a in cols[j].iter_mut() {
                *a /= norm;
            }
        }
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                self.m[i][j] = v;
            }
        }
        self.depth = 0;
        self.check()
    }
}
