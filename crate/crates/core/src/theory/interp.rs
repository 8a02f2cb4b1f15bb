//! Shape-preserving piecewise cubic Hermite interpolation on a uniform grid.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCubic {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    /// Fritsch–Carlson slopes for samples `y` at `x0 + i h`.
    pub fn new(x0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        assert!(n >= 2 && h > 0.0);
        let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut m = vec![0.0; n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            m[i] = if delta[i - 1] * delta[i] <= 0.0 {
                0.0
            } else {
                // harmonic mean keeps the interpolant monotone on each cell
                2.0 * delta[i - 1] * delta[i] / (delta[i - 1] + delta[i])
            };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let (a, b) = (m[i] / delta[i], m[i + 1] / delta[i]);
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                m[i] = t * a * delta[i];
                m[i + 1] = t * b * delta[i];
            }
        }
        Self { x0, h, y, m }
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.y.len() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.y.len()).map(|i| self.x0 + self.h * i as f64).collect()
    }

    /// Interpolated value; clamps to the end samples outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let t = (x - self.x0) / self.h;
        if t <= 0.0 {
            return self.y[0];
        }
        if t >= (n - 1) as f64 {
            return self.y[n - 1];
        }
        let i = (t.floor() as usize).min(n - 2);
        let u = t - i as f64;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.y[i] + h10 * self.h * self.m[i] + h01 * self.y[i + 1] + h11 * self.h * self.m[i + 1]
    }
}
