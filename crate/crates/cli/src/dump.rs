//! Realization dumps with sampled boundary polylines.

use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use hypbool::hypcore::{dist, exp_map, to_poincare_ball, Isometry, Point, TangentVec};
use hypbool::process::{Grain, Realization};

pub const BOUNDARY_POINTS: usize = 64;
const DIST_TOL: f64 = 1e-8;

/// Unit directions: evenly spaced on the circle, a Fibonacci lattice on the sphere.
fn directions(d: usize) -> Vec<Vec<f64>> {
    let n = BOUNDARY_POINTS;
    match d {
        2 => (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).map(|t| vec![t.cos(), t.sin()]).collect(),
        _ => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    vec![rho * t.cos(), rho * t.sin(), z]
                })
                .collect()
        }
    }
}

fn boundary(g: &Grain, dirs: &[Vec<f64>]) -> Result<Vec<Point>> {
    let to = Isometry::translation_to(&g.center);
    dirs.iter()
        .map(|u| {
            let p = to.apply(&exp_map(&TangentVec::at_origin(u)?, g.radius));
            let err = (dist(&g.center, &p)? - g.radius).abs();
            if err > DIST_TOL {
                bail!("boundary point at distance error {err:e} from its center");
            }
            Ok(p)
        })
        .collect()
}

/// One line per grain: Poincaré-ball center, hyperbolic radius, then the
/// boundary points' Poincaré coordinates, all whitespace separated.
pub fn render(real: &Realization, header: &str) -> Result<String> {
    let d = real.params.d;
    if d != 2 && d != 3 {
        bail!("realization dumps support d = 2 or d = 3, got d = {d}");
    }
    let dirs = directions(d);
    let mut out = String::from(header);
    let _ = writeln!(out, "# seed = {}", real.seed);
    let _ = writeln!(out, "# grains = {}", real.grains.len());
    let _ = writeln!(out, "# columns: center[{d}] radius boundary[{BOUNDARY_POINTS}x{d}] (Poincare ball)");
    for g in &real.grains {
        let mut coords = to_poincare_ball(&g.center);
        coords.push(g.radius);
        for p in boundary(g, &dirs)? {
            let y = to_poincare_ball(&p);
            let norm = y.iter().map(|c| c * c).sum::<f64>().sqrt();
            if !(norm < 1.0) {
                bail!("boundary point with Poincare norm {norm}");
            }
            coords.extend(y);
        }
        let line: Vec<String> = coords.iter().map(|c| format!("{c:.16e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    Ok(out)
}
