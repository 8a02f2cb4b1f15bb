//! Adaptive Gauss–Kronrod quadrature (21-point Kronrod / 10-point Gauss pair).
//!
//! Every one-dimensional integral in the theory module goes through
//! [`Integrator`]. Integrands that are smooth except at known points should pass
//! those points as breakpoints so that no panel straddles a kink.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_977_646_006,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_REL_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for (i, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = half * x;
        let s = f(center - dx) + f(center + dx);
        kronrod += w * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Configurable adaptive integrator.
#[derive(Debug, Clone)]
pub struct Integrator {
    abs_tol: f64,
    rel_tol: f64,
    max_evals: usize,
    breakpoints: Vec<f64>,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            max_evals: DEFAULT_MAX_EVALS,
            breakpoints: Vec::new(),
        }
    }
}

impl Integrator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn max_evals(mut self, n: usize) -> Self {
        self.max_evals = n;
        self
    }

    /// Interior points where the integrand may be non-smooth. Points outside
    /// the integration range are ignored.
    pub fn breakpoints(mut self, points: &[f64]) -> Self {
        self.breakpoints.extend_from_slice(points);
        self
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<QuadResult> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Numeric(format!("non-finite integration range [{a}, {b}]")));
        }
        if a == b {
            return Ok(QuadResult { value: 0.0, abs_error: 0.0, evals: 0 });
        }
        if a > b {
            let r = self.integrate(f, b, a)?;
            return Ok(QuadResult { value: -r.value, ..r });
        }

        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|&p| p > a && p < b && p.is_finite())
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut heap = BinaryHeap::new();
        let mut total = 0.0;
        let mut total_err = 0.0;
        let mut evals = 0;
        let mut lo = a;
        for hi in cuts.into_iter().chain(std::iter::once(b)) {
            let (value, error) = gk21(&mut f, lo, hi);
            evals += 21;
            total += value;
            total_err += error;
            heap.push(Panel { a: lo, b: hi, value, error });
            lo = hi;
        }

        let scale = (b - a).abs().max(a.abs()).max(b.abs());
        loop {
            if !total.is_finite() {
                return Err(Error::Numeric("integrand produced a non-finite value".into()));
            }
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= tol {
                break;
            }
            let worst = match heap.pop() {
                Some(p) => p,
                None => break,
            };
            let mid = 0.5 * (worst.a + worst.b);
            if (worst.b - worst.a) <= 64.0 * f64::EPSILON * scale {
                // Panel cannot be split further in floating point; keep its estimate.
                heap.push(Panel { error: 0.0, ..worst });
                total_err -= worst.error;
                continue;
            }
            if evals + 42 > self.max_evals {
                return Err(Error::Numeric(format!(
                    "quadrature did not converge in {} evaluations (estimate {total:e}, error {total_err:e})",
                    self.max_evals
                )));
            }
            let (v1, e1) = gk21(&mut f, worst.a, mid);
            let (v2, e2) = gk21(&mut f, mid, worst.b);
            evals += 42;
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.error;
            heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
            heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        }

        // Re-sum from the panels to shed accumulated update rounding.
        let (value, abs_error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        Ok(QuadResult { value, abs_error, evals })
    }
}

/// Integrates with default tolerances.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    Integrator::new().integrate(f, a, b).map(|r| r.value)
}

/// Integrates with default tolerances and the given breakpoints.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64]) -> Result<f64> {
    Integrator::new().breakpoints(breaks).integrate(f, a, b).map(|r| r.value)
}
