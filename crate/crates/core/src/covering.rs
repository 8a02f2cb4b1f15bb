//! A covering of hyperbolic space by balls of radius 1/2 with bounded overlap.
//!
//! Works natively in the upper half-space model `R^{d-1} x (0, inf)`. The
//! centers are `(7/8)^ell (2 a k, 1)` for `k in Z^{d-1}`, `ell in Z`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypcore::{from_half_space, half_space_dist, Point, MAX_DIM};
use crate::rng::stream_rng;

pub const BALL_RADIUS: f64 = 0.5;
/// Height ratio between consecutive lattice levels.
pub const LEVEL_RATIO: f64 = 7.0 / 8.0;
/// Half-width of the level window searched around a point's own level.
pub const LEVEL_WINDOW: i64 = 60;
/// Lateral half-width factor of the outer box.
pub const OUTER_LATERAL: f64 = 32.0;
/// Height factor of the outer box.
pub const OUTER_HEIGHT: f64 = 256.0;

const INCLUSION_TOL: f64 = 1e-12;

/// `sqrt((7 sinh^2(1/4) / 2 - 1/64) / (d - 1))`.
pub fn constant_a(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::Unsupported(format!("dimension {d}")));
    }
    let s = 0.25f64.sinh();
    Ok(((3.5 * s * s - 1.0 / 64.0) / (d - 1) as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoverIndex {
    pub k: Vec<i64>,
    pub ell: i64,
}

impl CoverIndex {
    pub fn new(k: Vec<i64>, ell: i64) -> Self {
        Self { k, ell }
    }
}

/// Half-space point helpers: the last coordinate is the height.
fn height(y: &[f64]) -> f64 {
    y[y.len() - 1]
}

#[derive(Debug, Clone, Copy)]
pub struct Covering {
    d: usize,
    a: f64,
}

impl Covering {
    pub fn new(d: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::Unsupported(format!("dimension {d}; supported range is 2..={MAX_DIM}")));
        }
        Ok(Self { d, a: constant_a(d)? })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn cover_center(&self, idx: &CoverIndex) -> Result<Vec<f64>> {
        if idx.k.len() != self.d - 1 {
            return Err(Error::InvalidPoint(format!("index has {} lateral entries, expected {}", idx.k.len(), self.d - 1)));
        }
        let h = LEVEL_RATIO.powi(idx.ell as i32);
        let mut c: Vec<f64> = idx.k.iter().map(|&k| 2.0 * self.a * k as f64 * h).collect();
        c.push(h);
        Ok(c)
    }

    /// Upper bound on the number of lattice cells of one level whose outer
    /// lateral box contains a given point: `(floor(32 / a) + 1)^{d-1}`.
    pub fn lateral_clique_bound(&self) -> u64 {
        ((OUTER_LATERAL / self.a).floor() as u64 + 1).pow(self.d as u32 - 1)
    }

    /// All lattice balls containing `y`.
    ///
    /// Only levels within `LEVEL_WINDOW` of `y`'s own level whose outer box
    /// can contain `y` are searched. Within a level the ball is the Euclidean
    /// ball with center `(x', h cosh(1/2))` and radius `h sinh(1/2)`, which
    /// bounds the lateral indices; membership is then decided with the
    /// half-space metric.
    pub fn covers(&self, y: &[f64]) -> Result<Vec<CoverIndex>> {
        if y.len() != self.d {
            return Err(Error::InvalidPoint(format!("expected {} half-space coordinates, got {}", self.d, y.len())));
        }
        let yd = height(y);
        if !(yd > 0.0 && yd.is_finite()) {
            return Err(Error::InvalidPoint(format!("height {yd} is not positive")));
        }
        let lat = &y[..self.d - 1];
        let own = (yd.ln() / LEVEL_RATIO.ln()).round() as i64;
        let (ch, sh) = (BALL_RADIUS.cosh(), BALL_RADIUS.sinh());
        let mut found = Vec::new();
        for ell in own - LEVEL_WINDOW..=own + LEVEL_WINDOW {
            let h = LEVEL_RATIO.powi(ell as i32);
            if yd < h / OUTER_HEIGHT || yd > h * OUTER_HEIGHT {
                continue;
            }
            let dv = yd - h * ch;
            let rho2 = h * h * sh * sh - dv * dv;
            if rho2 < -1e-12 * h * h {
                continue;
            }
            // slack so that boundary points are decided by the metric, not the prefilter
            let rho = rho2.max(0.0).sqrt() + 1e-9 * h;
            let step = 2.0 * self.a * h;
            let mut ranges = [(0i64, 0i64); MAX_DIM];
            for i in 0..self.d - 1 {
                let lo = ((lat[i] - rho) / step).ceil() as i64;
                let hi = ((lat[i] + rho) / step).floor() as i64;
                ranges[i] = (lo, hi);
            }
            if (0..self.d - 1).any(|i| ranges[i].0 > ranges[i].1) {
                continue;
            }
            let mut k = vec![0i64; self.d - 1];
            for (i, r) in ranges.iter().take(self.d - 1).enumerate() {
                k[i] = r.0;
            }
            loop {
                let idx = CoverIndex::new(k.clone(), ell);
                let c = self.cover_center(&idx)?;
                if half_space_dist(y, &c) <= BALL_RADIUS {
                    found.push(idx);
                }
                // odometer increment
                let mut i = 0;
                loop {
                    if i == self.d - 1 {
                        break;
                    }
                    k[i] += 1;
                    if k[i] <= ranges[i].1 {
                        break;
                    }
                    k[i] = ranges[i].0;
                    i += 1;
                }
                if i == self.d - 1 {
                    break;
                }
            }
        }
        if found.is_empty() {
            return Err(Error::CoverageViolation(format!("no lattice ball contains {y:?}")));
        }
        Ok(found)
    }

    /// Checks `C(z, a u) x [7u/8, u]  ⊆  B((z,u), 1/2)  ⊆  C(z, 32 u) x [u/256, 256 u]`
    /// on the corners of the inner box, points on each outer face pushed
    /// slightly outward, and `n_random` random points of each set.
    pub fn box_inclusion_check<R: Rng + ?Sized>(&self, rng: &mut R, z: &[f64], u: f64, n_random: usize) -> bool {
        let m = self.d - 1;
        if z.len() != m || !(u > 0.0) {
            return false;
        }
        let mut center = z.to_vec();
        center.push(u);
        let in_ball = |x: &[f64]| half_space_dist(x, &center) <= BALL_RADIUS + INCLUSION_TOL;
        let inner_lat = self.a * u;

        // inner box corners and random interior points must lie in the ball
        for mask in 0..(1u32 << (m + 1)) {
            let mut x: Vec<f64> = (0..m)
                .map(|i| z[i] + if mask >> i & 1 == 1 { inner_lat } else { -inner_lat })
                .collect();
            x.push(if mask >> m & 1 == 1 { u } else { 7.0 * u / 8.0 });
            if !in_ball(&x) {
                return false;
            }
        }
        for _ in 0..n_random {
            let mut x: Vec<f64> = (0..m).map(|i| z[i] + inner_lat * (2.0 * rng.random::<f64>() - 1.0)).collect();
            x.push(u * (7.0 + rng.random::<f64>()) / 8.0);
            if !in_ball(&x) {
                return false;
            }
        }

        // points of the ball must lie in the outer box
        let (ch, sh) = (BALL_RADIUS.cosh(), BALL_RADIUS.sinh());
        let in_outer = |x: &[f64]| {
            (0..m).all(|i| (x[i] - z[i]).abs() <= OUTER_LATERAL * u)
                && x[m] >= u / OUTER_HEIGHT
                && x[m] <= u * OUTER_HEIGHT
        };
        for _ in 0..n_random {
            // uniform in the Euclidean ball that represents the hyperbolic ball
            let g = crate::hypcore::uniform_direction(rng, m + 1);
            let r = u * sh * rng.random::<f64>().powf(1.0 / (m + 1) as f64);
            let mut x: Vec<f64> = (0..m).map(|i| z[i] + r * g[i]).collect();
            x.push(u * ch + r * g[m]);
            if !in_ball(&x) || !in_outer(&x) {
                return false;
            }
        }
        // points just beyond each outer face are outside the ball
        let push = 1.01;
        let mut probes: Vec<Vec<f64>> = Vec::new();
        let mut below = z.to_vec();
        below.push(u / OUTER_HEIGHT / push);
        probes.push(below);
        let mut above = z.to_vec();
        above.push(u * OUTER_HEIGHT * push);
        probes.push(above);
        for i in 0..m {
            for sign in [-1.0, 1.0] {
                for hf in [1.0 / OUTER_HEIGHT, 1.0, OUTER_HEIGHT] {
                    let mut x = z.to_vec();
                    x[i] += sign * OUTER_LATERAL * u * push;
                    x.push(u * hf);
                    probes.push(x);
                }
            }
        }
        probes.iter().all(|x| half_space_dist(x, &center) > BALL_RADIUS)
    }

    /// Samples `n` points log-uniform in height over `[e^{-h}, e^{h}]` with
    /// lateral coordinates uniform in `[-L y_d, L y_d]`, counts covering
    /// balls, and bins the maxima into `bins` equal log-height ranges.
    pub fn verify(&self, n: usize, seed: u64, options: &VerifyOptions) -> Result<CoverReport> {
        const CHUNK: usize = 4096;
        let bins = options.bins.max(1);
        let chunks = n.div_ceil(CHUNK);
        let partial: Vec<Result<(usize, Vec<usize>, Vec<usize>)>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream_rng(seed, c as u64);
                let count = CHUNK.min(n - c * CHUNK);
                let mut failures = 0;
                let mut max_bin = vec![0usize; bins];
                let mut hist = Vec::new();
                for _ in 0..count {
                    let t = options.log_height * (2.0 * rng.random::<f64>() - 1.0);
                    let h = t.exp();
                    let mut y: Vec<f64> = (0..self.d - 1)
                        .map(|_| options.lateral * h * (2.0 * rng.random::<f64>() - 1.0))
                        .collect();
                    y.push(h);
                    let bin = (((t + options.log_height) / (2.0 * options.log_height) * bins as f64) as usize).min(bins - 1);
                    match self.covers(&y) {
                        Ok(v) => {
                            let c = v.len();
                            max_bin[bin] = max_bin[bin].max(c);
                            if hist.len() <= c {
                                hist.resize(c + 1, 0);
                            }
                            hist[c] += 1;
                        }
                        Err(Error::CoverageViolation(_)) => failures += 1,
                        Err(e) => return Err(e),
                    }
                }
                Ok((failures, max_bin, hist))
            })
            .collect();
        let mut failures = 0;
        let mut per_bin = vec![0usize; bins];
        let mut histogram: Vec<usize> = Vec::new();
        for p in partial {
            let (f, m, h) = p?;
            failures += f;
            for (acc, v) in per_bin.iter_mut().zip(m) {
                *acc = (*acc).max(v);
            }
            if histogram.len() < h.len() {
                histogram.resize(h.len(), 0);
            }
            for (acc, v) in histogram.iter_mut().zip(h) {
                *acc += v;
            }
        }
        let max_overlap = per_bin.iter().copied().max().unwrap_or(0);
        let mut rng = stream_rng(seed, u64::MAX);
        let mut box_failures = 0;
        for _ in 0..options.box_checks {
            let e = options.box_log_scale * (2.0 * rng.random::<f64>() - 1.0);
            let u = 10f64.powf(e);
            let z: Vec<f64> = (0..self.d - 1).map(|_| 100.0 * u * (2.0 * rng.random::<f64>() - 1.0)).collect();
            if !self.box_inclusion_check(&mut rng, &z, u, options.box_random_points) {
                box_failures += 1;
            }
        }
        Ok(CoverReport {
            d: self.d,
            a: self.a,
            points_tested: n,
            coverage_failures: failures,
            max_overlap,
            per_decade_max_overlap: per_bin,
            overlap_histogram: histogram,
            overlap_bound: 101 * self.lateral_clique_bound(),
            box_checks: options.box_checks,
            box_failures,
        })
    }
}

/// Converts a half-space point to the hyperboloid model.
pub fn to_point(y: &[f64]) -> Result<Point> {
    from_half_space(y)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Heights range over `[e^{-log_height}, e^{log_height}]`.
    pub log_height: f64,
    /// Lateral half-width in units of the height.
    pub lateral: f64,
    pub bins: usize,
    pub box_checks: usize,
    /// `u` ranges over `10^{[-s, s]}` in the box checks.
    pub box_log_scale: f64,
    pub box_random_points: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { log_height: 20.0, lateral: 50.0, bins: 20, box_checks: 10_000, box_log_scale: 4.0, box_random_points: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub d: usize,
    pub a: f64,
    pub points_tested: usize,
    pub coverage_failures: usize,
    pub max_overlap: usize,
    pub per_decade_max_overlap: Vec<usize>,
    /// `overlap_histogram[c]` counts points covered by exactly `c` balls.
    pub overlap_histogram: Vec<usize>,
    /// `101 x` the lateral clique bound.
    pub overlap_bound: u64,
    pub box_checks: usize,
    pub box_failures: usize,
}

impl CoverReport {
    pub fn per_decade_constant(&self) -> bool {
        let nonempty: Vec<usize> = self.per_decade_max_overlap.iter().copied().filter(|&m| m > 0).collect();
        nonempty.windows(2).all(|w| w[0] == w[1])
    }

    pub fn passed(&self) -> bool {
        self.coverage_failures == 0
            && self.box_failures == 0
            && (self.max_overlap as u64) <= self.overlap_bound
            && self.per_decade_constant()
    }
}
