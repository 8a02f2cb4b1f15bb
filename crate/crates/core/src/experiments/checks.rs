//! Variance-growth scan and the joint surface–volume check.

use serde::{Deserialize, Serialize};

use super::{column, corrected_variance, run_replicates, ExperimentConfig, Functional, ReplicateRecord, SampleSizes, BOOTSTRAP_RESAMPLES};
use crate::error::{domain, Error, Result};
use crate::rng::{stream, stream_rng};
use crate::stats::{self, bootstrap_ci, bootstrap_se, gather};
use crate::theory::{CovarianceEstimate, Theory};

/// Relative half-width of the admissible band around the asymptotic ratio.
const SCAN_BAND: f64 = 0.5;
pub const MIN_MULTIVARIATE_REPLICATES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(rename = "R")]
    pub window_radius: f64,
    pub replicates: usize,
    /// Noise-corrected `Var(V_d) / Vol(B_R)`.
    pub ratio: f64,
    pub ci_95: (f64, f64),
    pub theory_ratio: f64,
    pub ci_contains_asymptotic: bool,
    pub within_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceScan {
    pub rows: Vec<ScanRow>,
    pub asymptotic: f64,
    pub c1: f64,
    pub c2: f64,
    pub bounded: bool,
}

/// `Var(V_d(Z cap B_R)) / Vol(B_R)` over a grid of windows; every ratio must
/// lie within 50% of the asymptotic limit.
pub fn variance_scan(cfg: &ExperimentConfig, r_grid: &[f64]) -> Result<VarianceScan> {
    if r_grid.is_empty() || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DegenerateInput("window grid must be nonempty and increasing".into()));
    }
    let theory = Theory::new(&cfg.params)?;
    let asymptotic = theory.var_volume_asymptotic()?;
    let (c1, c2) = ((1.0 - SCAN_BAND) * asymptotic, (1.0 + SCAN_BAND) * asymptotic);
    let space = cfg.params.space();
    let mut boot_rng = stream_rng(cfg.master_seed, stream::AUX);
    let mut rows = Vec::new();
    for &r in r_grid {
        let mut c = cfg.clone();
        c.window_radius = r;
        c.functionals = vec![Functional::Volume];
        let (_, records) = run_replicates(&c)?;
        let (v, s) = column(&records, "volume");
        if v.len() < 2 {
            return Err(Error::Resource(format!("too few successful replicates at R = {r}")));
        }
        let vol = space.ball_volume(r)?;
        let ratio = corrected_variance(&v, &s) / vol;
        let ci = bootstrap_ci(v.len(), BOOTSTRAP_RESAMPLES, 0.95, &mut boot_rng, |idx| corrected_variance(&gather(&v, idx), &gather(&s, idx)) / vol);
        rows.push(ScanRow {
            window_radius: r,
            replicates: v.len(),
            ratio,
            ci_95: ci,
            theory_ratio: theory.var_volume_exact(r)? / vol,
            ci_contains_asymptotic: ci.0 <= asymptotic && asymptotic <= ci.1,
            within_band: c1 <= ratio && ratio <= c2,
        });
    }
    let bounded = rows.iter().all(|r| r.within_band);
    Ok(VarianceScan { rows, asymptotic, c1, c2, bounded })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateReport {
    pub skipped: Option<String>,
    pub replicates: usize,
    pub sample_sizes: Option<SampleSizes>,
    pub empirical_cov: f64,
    pub empirical_cov_se: f64,
    pub theory_cov: Option<CovarianceEstimate>,
    pub cov_z: f64,
    pub empirical_corr: f64,
    pub theory_corr: f64,
    pub corr_z: f64,
    pub volume_normality: Option<stats::CltResult>,
    pub surface_normality: Option<stats::CltResult>,
    pub pass: bool,
}

impl MultivariateReport {
    fn skipped(reason: String) -> Self {
        Self {
            skipped: Some(reason),
            replicates: 0,
            sample_sizes: None,
            empirical_cov: 0.0,
            empirical_cov_se: 0.0,
            theory_cov: None,
            cov_z: 0.0,
            empirical_corr: 0.0,
            theory_corr: 0.0,
            corr_z: 0.0,
            volume_normality: None,
            surface_normality: None,
            pass: true,
        }
    }
}

/// Joint behaviour of `(V_{d-1}, V_d)` at the configured window.
///
/// The theory covariance is the finite-window formula at `R`, run until its
/// Monte Carlo error is at most 10% of its value. No closed form for the
/// surface variance is available, so the theory correlation divides by the
/// noise-corrected empirical surface variance and the exact volume variance.
/// Standard errors of the empirical quantities come from the bootstrap.
pub fn multivariate_check(cfg: &ExperimentConfig) -> Result<MultivariateReport> {
    if cfg.replicates < MIN_MULTIVARIATE_REPLICATES {
        return Err(domain("multivariate replicates", cfg.replicates as f64));
    }
    let theory = Theory::new(&cfg.params)?;
    let var_v = theory.var_volume_exact(cfg.window_radius)?;
    if !(var_v > 1e-12 * cfg.params.space().ball_volume(cfg.window_radius)?.powi(2)) {
        return Ok(MultivariateReport::skipped("volume variance is numerically zero; the joint law is degenerate".into()));
    }
    let mut c = cfg.clone();
    c.functionals = vec![Functional::Volume, Functional::Surface];
    let (sizes, records) = run_replicates(&c)?;
    let mut report = joint_summary(cfg, &theory, &records)?;
    report.sample_sizes = Some(sizes);
    Ok(report)
}

/// The joint analysis of [`multivariate_check`] over existing records that
/// carry both `volume` and `surface`.
pub fn joint_summary(cfg: &ExperimentConfig, theory: &Theory, records: &[ReplicateRecord]) -> Result<MultivariateReport> {
    let var_v = theory.var_volume_exact(cfg.window_radius)?;
    let ok: Vec<_> = records.iter().filter(|r| r.error.is_none()).cloned().collect();
    let (v, vs) = column(&ok, "volume");
    let (s, ss) = column(&ok, "surface");
    let n = v.len();
    let th = theory.cov_surf_vol_local_to(cfg.window_radius, 0.1, 20_000, 2_000_000, cfg.master_seed)?;
    let mut boot_rng = stream_rng(cfg.master_seed, stream::AUX);
    let cov = stats::covariance(&s, &v);
    let cov_se = bootstrap_se(n, BOOTSTRAP_RESAMPLES, &mut boot_rng, |idx| stats::covariance(&gather(&s, idx), &gather(&v, idx)));
    let cov_z = (cov - th.value) / (cov_se * cov_se + th.std_error * th.std_error).sqrt();
    // correlation of the noise-free functionals, estimated from noisy replicates
    let corr_of = |idx: &[usize]| {
        let (a, b) = (gather(&s, idx), gather(&v, idx));
        let (va, vb) = (corrected_variance(&a, &gather(&ss, idx)), corrected_variance(&b, &gather(&vs, idx)));
        (stats::covariance(&a, &b) / (va * vb).sqrt(), va)
    };
    let all: Vec<usize> = (0..n).collect();
    let (emp_corr, var_s) = corr_of(&all);
    let theory_corr = th.value / (var_v * var_s).sqrt();
    let diff_se = bootstrap_se(n, BOOTSTRAP_RESAMPLES, &mut boot_rng, |idx| {
        let (r, va) = corr_of(idx);
        r - th.value / (var_v * va).sqrt()
    });
    let th_part = th.std_error / (var_v * var_s).sqrt();
    let corr_z = (emp_corr - theory_corr) / (diff_se * diff_se + th_part * th_part).sqrt();
    let volume_normality = stats::clt_test(&v).ok();
    let surface_normality = stats::clt_test(&s).ok();
    let pass = cov_z.abs() <= 3.0
        && corr_z.abs() <= 3.0
        && volume_normality.is_some_and(|r| r.pass)
        && surface_normality.is_some_and(|r| r.pass);
    Ok(MultivariateReport {
        skipped: None,
        replicates: n,
        sample_sizes: None,
        empirical_cov: cov,
        empirical_cov_se: cov_se,
        theory_cov: Some(th),
        cov_z,
        empirical_corr: emp_corr,
        theory_corr,
        corr_z,
        volume_normality,
        surface_normality,
        pass,
    })
}
