//! Nerve of the window-clipped grains in the plane.
//!
//! A finite family of closed discs has a common point iff some disc center or
//! some pairwise boundary intersection point lies in all of them: a nonempty
//! intersection either has a corner, which is such a point, or is bounded by a
//! single circle, in which case that disc lies inside all the others.

use crate::error::{Error, Result};
use crate::hypcore::minkowski;
use crate::process::Realization;

/// Default bound on simplex size.
pub const DEFAULT_CLIQUE_CAP: usize = 20;

/// Relative slack in the containment test.
const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Nerve {
    pub vertices: Vec<usize>,
    /// All nonempty simplices, each sorted, vertices included.
    pub simplices: Vec<Vec<usize>>,
}

impl Nerve {
    /// Alternating simplex count.
    pub fn euler_characteristic(&self) -> i64 {
        self.simplices.iter().map(|s| if s.len() % 2 == 1 { 1 } else { -1 }).sum()
    }

    pub fn max_dimension(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.len() - 1).max()
    }
}

#[derive(Debug, Clone, Copy)]
struct Disc {
    c: [f64; 3],
    ch: f64,
}

impl Disc {
    fn contains(&self, x: &[f64; 3]) -> bool {
        -minkowski(&self.c, x) <= self.ch * (1.0 + TOL)
    }
}

/// Boundary intersection points of two discs.
fn circle_points(a: &Disc, b: &Disc) -> Vec<[f64; 3]> {
    let c = -minkowski(&a.c, &b.c);
    let den = 1.0 - c * c;
    if den.abs() < 1e-14 {
        return Vec::new();
    }
    let alpha = (a.ch - c * b.ch) / den;
    let beta = (b.ch - c * a.ch) / den;
    let tau2 = alpha * alpha + beta * beta + 2.0 * alpha * beta * c - 1.0;
    if tau2 < 0.0 {
        return Vec::new();
    }
    // Minkowski normal of the plane spanned by the two centers
    let (p, q) = (a.c, b.c);
    let cross = [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
    let mut n = [-cross[0], cross[1], cross[2]];
    let nn = minkowski(&n, &n);
    if !(nn > 0.0) {
        return Vec::new();
    }
    let s = 1.0 / nn.sqrt();
    n.iter_mut().for_each(|v| *v *= s);
    let tau = tau2.sqrt();
    let base: [f64; 3] = std::array::from_fn(|i| alpha * p[i] + beta * q[i]);
    vec![std::array::from_fn(|i| base[i] + tau * n[i]), std::array::from_fn(|i| base[i] - tau * n[i])]
}

struct Builder {
    // grains followed by the window
    discs: Vec<Disc>,
}

impl Builder {
    fn new(real: &Realization) -> Self {
        let mut discs: Vec<Disc> = real
            .grains
            .iter()
            .map(|g| {
                let x = g.center.coords();
                Disc { c: [x[0], x[1], x[2]], ch: g.cosh_radius() }
            })
            .collect();
        discs.push(Disc { c: [1.0, 0.0, 0.0], ch: real.window_radius.cosh() });
        Self { discs }
    }

    fn window(&self) -> usize {
        self.discs.len() - 1
    }

    fn in_all(&self, x: &[f64; 3], set: &[usize]) -> bool {
        set.iter().all(|&i| self.discs[i].contains(x))
    }

    /// Whether the discs in `set` (which includes the window) share a point.
    fn feasible(&self, set: &[usize]) -> bool {
        for &i in set {
            if self.in_all(&self.discs[i].c, set) {
                return true;
            }
        }
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                if circle_points(&self.discs[i], &self.discs[j]).iter().any(|x| self.in_all(x, set)) {
                    return true;
                }
            }
        }
        false
    }
}

/// Builds the nerve of `{K_i cap B_R}`.
pub fn nerve_build(real: &Realization) -> Result<Nerve> {
    nerve_build_capped(real, DEFAULT_CLIQUE_CAP)
}

pub fn nerve_build_capped(real: &Realization, cap: usize) -> Result<Nerve> {
    if real.params.d != 2 {
        return Err(Error::Unsupported(format!("nerve construction needs d = 2, got {}", real.params.d)));
    }
    let b = Builder::new(real);
    let w = b.window();
    let vertices: Vec<usize> = (0..w).filter(|&i| b.feasible(&[i, w])).collect();
    let mut adj = vec![Vec::new(); w];
    for (a, &i) in vertices.iter().enumerate() {
        for &j in &vertices[a + 1..] {
            if b.feasible(&[i, j, w]) {
                adj[i].push(j);
            }
        }
    }
    let mut simplices = Vec::new();
    let mut current = Vec::new();
    for &v in &vertices {
        current.clear();
        current.push(v);
        extend(&b, &adj, &mut current, &adj[v], cap, &mut simplices)?;
    }
    Ok(Nerve { vertices, simplices })
}

/// Records `current` and recurses over higher-indexed common neighbours.
fn extend(b: &Builder, adj: &[Vec<usize>], current: &mut Vec<usize>, candidates: &[usize], cap: usize, out: &mut Vec<Vec<usize>>) -> Result<()> {
    if current.len() > cap {
        return Err(Error::Resource(format!(
            "nerve simplex of size {} exceeds the clique cap {cap}; lower gamma or the window radius",
            current.len()
        )));
    }
    out.push(current.clone());
    for (k, &v) in candidates.iter().enumerate() {
        current.push(v);
        let mut set = current.clone();
        set.push(b.window());
        if b.feasible(&set) {
            let next: Vec<usize> = candidates[k + 1..].iter().copied().filter(|u| adj[v].contains(u)).collect();
            extend(b, adj, current, &next, cap, out)?;
        }
        current.pop();
    }
    Ok(())
}

/// Euler characteristic of `Z cap B_R` in the plane.
pub fn euler_char_2d(real: &Realization) -> Result<i64> {
    Ok(nerve_build(real)?.euler_characteristic())
}

/// `V_0 = 2 pi chi + V_2`.
pub fn v0_2d(real: &Realization, vol_estimate: f64) -> Result<f64> {
    Ok(2.0 * std::f64::consts::PI * euler_char_2d(real)? as f64 + vol_estimate)
}

/// Whether the clipped grains indexed by `set` share a point.
pub fn common_point(real: &Realization, set: &[usize]) -> Result<bool> {
    if real.params.d != 2 {
        return Err(Error::Unsupported("common_point needs d = 2".into()));
    }
    let b = Builder::new(real);
    let mut s = set.to_vec();
    s.push(b.window());
    Ok(b.feasible(&s))
}
