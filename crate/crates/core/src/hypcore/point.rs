use std::fmt;

use crate::error::{Error, Result};

use super::MAX_DIM;

pub(crate) const SHEET_TOL: f64 = 1e-9;

/// Minkowski bilinear form `-a0 b0 + a1 b1 + ... + ad bd`.
#[inline]
pub fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = -a[0] * b[0];
    for i in 1..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// A point of the upper sheet of the hyperboloid `<x,x> = -1`, `x0 >= 1`.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    dim: usize,
    x: [f64; MAX_DIM + 1],
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.coords()).finish()
    }
}

impl Point {
    /// The base point `(1, 0, ..., 0)`.
    pub fn origin(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} unsupported");
        let mut x = [0.0; MAX_DIM + 1];
        x[0] = 1.0;
        Self { dim, x }
    }

    /// Validates Minkowski coordinates.
    pub fn new(coords: &[f64]) -> Result<Self> {
        let dim = coords.len().wrapping_sub(1);
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidPoint(format!("{} coordinates", coords.len())));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinates {coords:?}")));
        }
        let mut x = [0.0; MAX_DIM + 1];
        x[..=dim].copy_from_slice(coords);
        let p = Self { dim, x };
        let form = minkowski(p.coords(), p.coords());
        let scale = coords[0] * coords[0];
        if (form + 1.0).abs() > SHEET_TOL * scale.max(1.0) || coords[0] < 1.0 - SHEET_TOL {
            return Err(Error::InvalidPoint(format!("{coords:?} is off the upper sheet (<x,x> = {form})")));
        }
        Ok(p)
    }

    /// Lifts spatial coordinates onto the sheet; always valid.
    pub fn from_spatial(spatial: &[f64]) -> Self {
        let dim = spatial.len();
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} unsupported");
        let mut x = [0.0; MAX_DIM + 1];
        x[1..=dim].copy_from_slice(spatial);
        let n2: f64 = spatial.iter().map(|v| v * v).sum();
        x[0] = (1.0 + n2).sqrt();
        Self { dim, x }
    }

    pub(crate) fn from_raw(dim: usize, x: [f64; MAX_DIM + 1]) -> Self {
        Self { dim, x }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.x[..=self.dim]
    }

    pub fn spatial(&self) -> &[f64] {
        &self.x[1..=self.dim]
    }

    pub fn time(&self) -> f64 {
        self.x[0]
    }

    pub(crate) fn raw(&self) -> &[f64; MAX_DIM + 1] {
        &self.x
    }

    /// Projects back onto the sheet by recomputing the time coordinate.
    pub fn renormalize(&mut self) {
        let n2: f64 = self.spatial().iter().map(|v| v * v).sum();
        self.x[0] = (1.0 + n2).sqrt();
    }

    /// `cosh` of the distance to `other`, i.e. `-<x, y>`.
    #[inline]
    pub fn cosh_dist(&self, other: &Point) -> f64 {
        -minkowski(self.coords(), other.coords())
    }

    /// Distance from the base point.
    pub fn norm(&self) -> f64 {
        let r: f64 = self.spatial().iter().map(|v| v * v).sum::<f64>().sqrt();
        r.asinh()
    }
}

/// A unit tangent vector at `base`.
#[derive(Clone, Copy, PartialEq)]
pub struct TangentVec {
    base: Point,
    dir: [f64; MAX_DIM + 1],
}

impl fmt::Debug for TangentVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TangentVec").field("base", &self.base).field("dir", &self.dir()).finish()
    }
}

impl TangentVec {
    pub fn new(base: Point, dir: &[f64]) -> Result<Self> {
        if dir.len() != base.dim + 1 {
            return Err(Error::InvalidTangent(format!("expected {} components, got {}", base.dim + 1, dir.len())));
        }
        let orth = minkowski(base.coords(), dir);
        let norm = minkowski(dir, dir);
        let scale = base.time().max(1.0);
        if orth.abs() > SHEET_TOL * scale * scale || (norm - 1.0).abs() > SHEET_TOL * scale * scale {
            return Err(Error::InvalidTangent(format!("<u,x> = {orth}, <u,u> = {norm}")));
        }
        let mut d = [0.0; MAX_DIM + 1];
        d[..dir.len()].copy_from_slice(dir);
        Ok(Self { base, dir: d })
    }

    /// A unit direction at the base point from a spatial unit vector.
    pub fn at_origin(spatial: &[f64]) -> Result<Self> {
        let dim = spatial.len();
        let mut dir = vec![0.0; dim + 1];
        dir[1..].copy_from_slice(spatial);
        Self::new(Point::origin(dim), &dir)
    }

    /// Normalizes an arbitrary nonzero spatial vector into a direction at the base point.
    pub fn at_origin_normalized(spatial: &[f64]) -> Result<Self> {
        let n: f64 = spatial.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidTangent("zero direction".into()));
        }
        let unit: Vec<f64> = spatial.iter().map(|v| v / n).collect();
        Self::at_origin(&unit)
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn dir(&self) -> &[f64] {
        &self.dir[..=self.base.dim]
    }

    /// Spatial part of the direction; for a tangent at the base point this is
    /// the unit vector in `R^d`.
    pub fn spatial(&self) -> &[f64] {
        &self.dir[1..=self.base.dim]
    }

    pub fn negate(&self) -> Self {
        let mut dir = self.dir;
        for v in dir.iter_mut() {
            *v = -*v;
        }
        Self { base: self.base, dir }
    }
}

/// `exp_x(s u) = cosh(s) x + sinh(s) u`.
pub fn exp_map(u: &TangentVec, s: f64) -> Point {
    let (sh, ch) = (s.sinh(), s.cosh());
    let mut x = [0.0; MAX_DIM + 1];
    for (i, v) in x.iter_mut().enumerate().take(u.base.dim + 1) {
        *v = ch * u.base.x[i] + sh * u.dir[i];
    }
    let mut p = Point::from_raw(u.base.dim, x);
    p.renormalize();
    p
}

/// Point at distance `s` from the base point in the spatial unit direction `u`.
pub(crate) fn exp_origin(u: &[f64], s: f64) -> Point {
    let dim = u.len();
    let sh = s.sinh();
    let mut x = [0.0; MAX_DIM + 1];
    for i in 0..dim {
        x[i + 1] = sh * u[i];
    }
    x[0] = s.cosh();
    Point::from_raw(dim, x)
}

/// Hyperbolic distance.
///
/// Two algebraically equivalent forms are used: `acosh(-<x,y>)` when the
/// points are well separated, and a cancellation-free expression for
/// `<x-y, x-y>` when they are close relative to their distance from the base point.
pub fn dist(x: &Point, y: &Point) -> Result<f64> {
    if x.dim != y.dim {
        return Err(Error::InvalidPoint(format!("dimension mismatch {} vs {}", x.dim, y.dim)));
    }
    let d = x.dim;
    let s = x.x[0] + y.x[0];
    let mut a = [0.0; MAX_DIM];
    let mut sum = [0.0; MAX_DIM];
    let mut sum2 = 0.0;
    for i in 0..d {
        a[i] = x.x[i + 1] - y.x[i + 1];
        sum[i] = x.x[i + 1] + y.x[i + 1];
        sum2 += sum[i] * sum[i];
    }
    let a2: f64 = a[..d].iter().map(|v| v * v).sum();
    if a2 == 0.0 {
        return Ok(0.0);
    }
    let (par2, perp2) = if sum2 > 0.0 {
        let n = sum2.sqrt();
        let proj: f64 = a[..d].iter().zip(&sum[..d]).map(|(p, q)| p * q).sum::<f64>() / n;
        let mut perp2 = 0.0;
        for i in 0..d {
            let c = a[i] - proj * sum[i] / n;
            perp2 += c * c;
        }
        (proj * proj, perp2)
    } else {
        (0.0, a2)
    };
    let k = par2 / (s * s);
    if k <= 0.5 {
        let q = (perp2 + 4.0 * k) / (1.0 - k);
        Ok(2.0 * (q.sqrt() / 2.0).asinh())
    } else {
        let b = x.cosh_dist(y);
        if b < 1.0 - SHEET_TOL * x.x[0] * y.x[0] {
            return Err(Error::InvalidPoint(format!("-<x,y> = {b} < 1")));
        }
        Ok(b.max(1.0).acosh())
    }
}

/// Busemann function of the direction `u` at the base point:
/// `b_u(z) = ln(-<z, p + u>)`, normalized so that `b_u(p) = 0` and
/// `b_u(exp_p(s u)) = -s`.
pub fn busemann(z: &Point, u: &TangentVec) -> f64 {
    busemann_spatial(z, u.spatial())
}

pub(crate) fn busemann_spatial(z: &Point, u: &[f64]) -> f64 {
    let zs = z.spatial();
    let r = zs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let proj: f64 = zs.iter().zip(u).map(|(a, b)| a * b).sum();
    // |z_s| - z_s.u without cancellation
    let gap = if proj > 0.0 {
        let mut perp2 = 0.0;
        for (a, b) in zs.iter().zip(u) {
            let c = a - proj * b;
            perp2 += c * c;
        }
        perp2 / (r + proj)
    } else {
        r - proj
    };
    // z0 - |z_s| = 1 / (z0 + |z_s|)
    (1.0 / (z.time() + r) + gap).ln()
}

/// Closed horoball `{z : b_u(z) <= -t}`; its boundary passes through `exp_p(t u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horoball {
    pub dir: TangentVec,
    pub offset: f64,
}

impl Horoball {
    pub fn new(dir: TangentVec, offset: f64) -> Result<Self> {
        if dir.base().spatial().iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidTangent("horoball direction must be based at the base point".into()));
        }
        Ok(Self { dir, offset })
    }

    pub fn contains(&self, z: &Point) -> bool {
        busemann(z, &self.dir) <= -self.offset
    }

    /// The boundary point closest to the base point.
    pub fn apex(&self) -> Point {
        exp_map(&self.dir, self.offset)
    }
}

/// Poincaré-ball coordinates `x_s / (1 + x0)`.
pub fn to_poincare_ball(x: &Point) -> Vec<f64> {
    let den = 1.0 + x.time();
    x.spatial().iter().map(|v| v / den).collect()
}

pub fn from_poincare_ball(y: &[f64]) -> Result<Point> {
    let n2: f64 = y.iter().map(|v| v * v).sum();
    if n2 >= 1.0 || !n2.is_finite() {
        return Err(Error::InvalidPoint(format!("Poincaré coordinates {y:?} outside the unit ball")));
    }
    let den = 1.0 - n2;
    let spatial: Vec<f64> = y.iter().map(|v| 2.0 * v / den).collect();
    Ok(Point::from_spatial(&spatial))
}

/// `x0 - x_d` evaluated without cancellation.
fn time_minus_last(x: &Point) -> f64 {
    let d = x.dim;
    let last = x.x[d];
    if last > 0.0 {
        let lateral: f64 = x.x[1..d].iter().map(|v| v * v).sum();
        (1.0 + lateral) / (x.x[0] + last)
    } else {
        x.x[0] - last
    }
}

/// Upper half-space coordinates `(x_1, ..., x_{d-1}, 1) / (x0 - x_d)`; the base
/// point maps to `(0, ..., 0, 1)`.
pub fn to_half_space(x: &Point) -> Vec<f64> {
    let t = time_minus_last(x);
    let d = x.dim;
    let mut out: Vec<f64> = x.x[1..d].iter().map(|v| v / t).collect();
    out.push(1.0 / t);
    out
}

pub fn from_half_space(y: &[f64]) -> Result<Point> {
    let d = y.len();
    if !(1..=MAX_DIM).contains(&d) {
        return Err(Error::InvalidPoint(format!("{d} half-space coordinates")));
    }
    let h = y[d - 1];
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidPoint(format!("half-space height {h} must be positive")));
    }
    let lateral2: f64 = y[..d - 1].iter().map(|v| v * v).sum();
    let minus = 1.0 / h;
    let plus = h + lateral2 / h;
    let mut x = [0.0; MAX_DIM + 1];
    x[0] = 0.5 * (plus + minus);
    for i in 0..d - 1 {
        x[i + 1] = y[i] / h;
    }
    x[d] = 0.5 * (plus - minus);
    Ok(Point::from_raw(d, x))
}

/// Half-space metric `2 arsinh(|x - y| / (2 sqrt(x_d y_d)))`.
pub fn half_space_dist(x: &[f64], y: &[f64]) -> f64 {
    let d = x.len();
    let e2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    2.0 * (e2.sqrt() / (2.0 * (x[d - 1] * y[d - 1]).sqrt())).asinh()
}

/// Applies the hyperbolic translation carrying the base point to `to` (the
/// boost along the geodesic from the base point) to `y`.
pub fn translate(to: &Point, y: &Point) -> Point {
    let d = to.dim;
    let t0 = to.x[0];
    let dot: f64 = to.spatial().iter().zip(y.spatial()).map(|(a, b)| a * b).sum();
    let coef = y.x[0] + dot / (1.0 + t0);
    let mut x = [0.0; MAX_DIM + 1];
    for i in 1..=d {
        x[i] = y.x[i] + to.x[i] * coef;
    }
    let mut p = Point::from_raw(d, x);
    p.renormalize();
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: &[f64]) -> Vec<f64> {
        let n: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter().map(|a| a / n).collect()
    }

    #[test]
    fn origin_distance_zero() {
        let p = Point::origin(3);
        assert_eq!(dist(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn geodesic_parameterization() {
        let u = TangentVec::at_origin(&unit(&[1.0, -2.0, 0.5])).unwrap();
        for s in [0.5, 2.0] {
            let x = exp_map(&u, s);
            assert!((dist(&Point::origin(3), &x).unwrap() - s).abs() < 1e-12);
        }
        assert_eq!(exp_map(&u, 0.0), Point::origin(3));
    }

    #[test]
    fn distance_accurate_far_from_origin() {
        let u = unit(&[0.3, 0.4]);
        let v = unit(&[-0.8, 0.1]);
        let a = exp_origin(&u, 30.0);
        let b = exp_origin(&u, 29.5);
        // lateral coordinates at radius 30 carry ~1e-3 absolute rounding
        assert!((dist(&a, &b).unwrap() - 0.5).abs() < 1e-6);
        let c = exp_origin(&u, 20.0 + 1e-6);
        let e = exp_origin(&u, 20.0);
        assert!((dist(&c, &e).unwrap() - 1e-6).abs() < 1e-9);
        // law of cosines for a far and a near point
        let far = exp_origin(&u, 30.0);
        let near = exp_origin(&v, 2.0);
        let cos_t: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        let expected = (30f64.cosh() * 2f64.cosh() - 30f64.sinh() * 2f64.sinh() * cos_t).acosh();
        assert!((dist(&far, &near).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn invalid_point_rejected() {
        assert!(Point::new(&[1.0, 1.0, 0.0]).is_err());
        assert!(Point::new(&[-1.0, 0.0]).is_err());
        assert!(Point::new(&[2f64.sqrt(), 1.0]).is_ok());
    }

    #[test]
    fn invalid_tangent_rejected() {
        let p = Point::origin(2);
        assert!(matches!(TangentVec::new(p, &[0.0, 2.0, 0.0]), Err(Error::InvalidTangent(_))));
        assert!(matches!(TangentVec::new(p, &[1.0, 1.0, 0.0]), Err(Error::InvalidTangent(_))));
    }

    #[test]
    fn busemann_along_axis() {
        let u = TangentVec::at_origin(&unit(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(busemann(&Point::origin(3), &u), 0.0);
        for s in [1.0, -1.0, 3.0, -3.0] {
            let z = exp_map(&u, s);
            assert!((busemann(&z, &u) + s).abs() < 1e-10, "s = {s}");
        }
        // far along the axis, naive evaluation would underflow
        let z = exp_map(&u, 25.0);
        assert!((busemann(&z, &u) + 25.0).abs() < 1e-9);
    }

    #[test]
    fn horoball_contains_apex_and_beyond() {
        let u = TangentVec::at_origin(&[0.0, 1.0]).unwrap();
        let hb = Horoball::new(u, 0.7).unwrap();
        let apex = hb.apex();
        assert!((busemann(&apex, &u) + 0.7).abs() < 1e-12);
        assert!(hb.contains(&exp_map(&u, 1.5)));
        assert!(!hb.contains(&Point::origin(2)));
        assert!(Horoball::new(u, -0.1).unwrap().contains(&Point::origin(2)));
    }

    #[test]
    fn poincare_origin() {
        assert_eq!(to_poincare_ball(&Point::origin(2)), vec![0.0, 0.0]);
        assert_eq!(to_half_space(&Point::origin(3)), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn translate_moves_origin() {
        let x = exp_origin(&unit(&[1.0, 2.0]), 1.3);
        let t = translate(&x, &Point::origin(2));
        for (a, b) in t.coords().iter().zip(x.coords()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
