//! Replicate harness comparing simulated functionals with the closed-form theory.

mod checks;

pub use checks::{joint_summary, multivariate_check, variance_scan, MultivariateReport, ScanRow, VarianceScan};
pub use crate::stats::{clt_test, CltResult};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::functionals::{estimate_surface, estimate_volume, nerve_build_capped, FunctionalEstimate, DEFAULT_CLIQUE_CAP};
use crate::process::{sample_realization_capped, ModelParams, DEFAULT_COUNT_CAP};
use crate::rng::{replicate_seed, stream, stream_rng};
use crate::stats::{self, bootstrap_ci, gather, MIN_NORMALITY_SAMPLES};
use crate::theory::{ball_v0, grain_moments, mean_euler_2d, mean_intrinsic_k0, mean_surface, mean_volume, Theory};

const PILOT_REPLICATES: u64 = 20;
const PILOT_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const PILOT_VOLUME_SAMPLES: usize = 4000;
const PILOT_SURFACE_SAMPLES: usize = 100;
const MAX_VOLUME_SAMPLES: usize = 5_000_000;
const MAX_SURFACE_SAMPLES: usize = 100_000;
/// Target ratio of estimator noise to between-replicate spread.
const NOISE_RATIO: f64 = 0.1;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Volume,
    Surface,
    Euler,
    V0,
}

impl Functional {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Volume => "volume",
            Self::Surface => "surface",
            Self::Euler => "euler",
            Self::V0 => "v0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "volume" => Some(Self::Volume),
            "surface" => Some(Self::Surface),
            "euler" => Some(Self::Euler),
            "v0" => Some(Self::V0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub window_radius: f64,
    pub replicates: usize,
    pub master_seed: u64,
    pub functionals: Vec<Functional>,
    /// Hit-or-miss samples per replicate; tuned by a pilot run when absent.
    pub volume_samples: Option<usize>,
    /// Sphere samples per grain; tuned by a pilot run when absent.
    pub surface_samples: Option<usize>,
    pub clique_cap: usize,
    pub count_cap: f64,
    pub normality: bool,
}

impl ExperimentConfig {
    pub fn new(params: ModelParams, window_radius: f64, replicates: usize, master_seed: u64, functionals: &[Functional]) -> Self {
        Self {
            params,
            window_radius,
            replicates,
            master_seed,
            functionals: functionals.to_vec(),
            volume_samples: None,
            surface_samples: None,
            clique_cap: DEFAULT_CLIQUE_CAP,
            count_cap: DEFAULT_COUNT_CAP,
            normality: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.window_radius > 0.0 && self.window_radius.is_finite()) {
            return Err(domain("window radius", self.window_radius));
        }
        if self.replicates == 0 {
            return Err(domain("replicates", 0.0));
        }
        if self.functionals.is_empty() {
            return Err(Error::DegenerateInput("no functionals requested".into()));
        }
        let planar_only = self.functionals.iter().any(|f| matches!(f, Functional::Euler | Functional::V0));
        if planar_only && self.params.d != 2 {
            return Err(Error::Unsupported("euler and v0 are estimated only for d = 2".into()));
        }
        if self.volume_samples == Some(0) || self.surface_samples == Some(0) {
            return Err(domain("estimator samples", 0.0));
        }
        Ok(())
    }

    fn wants(&self, f: Functional) -> bool {
        self.functionals.contains(&f)
    }

    fn needs_volume(&self) -> bool {
        self.wants(Functional::Volume) || self.wants(Functional::V0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizes {
    pub volume: usize,
    pub surface: usize,
    pub tuned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub seed: u64,
    #[serde(rename = "R")]
    pub window_radius: f64,
    pub values: BTreeMap<String, FunctionalEstimate>,
    /// Set when the replicate hit a resource cap or numerical failure.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSummary {
    pub n: usize,
    pub empirical_mean: f64,
    pub empirical_var: f64,
    /// Mean squared estimator standard error.
    pub mean_estimator_var: f64,
    /// `empirical_var - mean_estimator_var`.
    pub corrected_var: f64,
    pub theory_mean: f64,
    pub mean_std_error: f64,
    /// Absent when the replicates have no spread but differ from theory.
    pub z_score: Option<f64>,
    pub theory_var: Option<f64>,
    pub var_ci_99: Option<(f64, f64)>,
    pub var_in_ci: Option<bool>,
    pub normality_stat: Option<f64>,
    pub normality_pass: Option<bool>,
    pub normality_note: Option<String>,
}

impl FunctionalSummary {
    pub fn passed(&self) -> bool {
        self.z_score.is_some_and(|z| z.abs() <= 3.0) && self.var_in_ci != Some(false) && self.normality_pass != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub config: ExperimentConfig,
    pub sample_sizes: SampleSizes,
    pub functionals: BTreeMap<String, FunctionalSummary>,
    pub replicates_ok: usize,
    pub failures: Vec<(u64, String)>,
    pub notes: Vec<String>,
    pub runtime_seconds: f64,
}

impl SummaryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.functionals.values().all(FunctionalSummary::passed)
    }
}

const NOTES: [&str; 3] = [
    "mean z-scores use the between-replicate standard deviation, which already contains estimator noise (law of total variance)",
    "corrected_var subtracts the mean squared estimator standard error from the replicate variance; the variance check and its bootstrap interval use corrected_var",
    "normality is checked as a limit law with the Anderson-Darling test at the 1% level; convergence rates are not tested",
];

/// One replicate: a realization and the requested estimates.
pub fn run_replicate(cfg: &ExperimentConfig, seed: u64, sizes: SampleSizes) -> ReplicateRecord {
    let mut values = BTreeMap::new();
    let error = replicate_values(cfg, seed, sizes, &mut values).err().map(|e| e.to_string());
    if error.is_some() {
        values.clear();
    }
    ReplicateRecord { seed, window_radius: cfg.window_radius, values, error }
}

fn replicate_values(cfg: &ExperimentConfig, seed: u64, sizes: SampleSizes, out: &mut BTreeMap<String, FunctionalEstimate>) -> Result<()> {
    let real = sample_realization_capped(&cfg.params, cfg.window_radius, seed, cfg.count_cap)?;
    let vol = if cfg.needs_volume() {
        Some(estimate_volume(&real, sizes.volume, &mut stream_rng(seed, stream::VOLUME))?)
    } else {
        None
    };
    if let (true, Some(v)) = (cfg.wants(Functional::Volume), vol) {
        out.insert("volume".into(), v);
    }
    if cfg.wants(Functional::Surface) {
        out.insert("surface".into(), estimate_surface(&real, sizes.surface, &mut stream_rng(seed, stream::SURFACE))?);
    }
    if cfg.wants(Functional::Euler) || cfg.wants(Functional::V0) {
        let chi = nerve_build_capped(&real, cfg.clique_cap)?.euler_characteristic() as f64;
        if cfg.wants(Functional::Euler) {
            out.insert("euler".into(), FunctionalEstimate::exact(chi));
        }
        if let (true, Some(v)) = (cfg.wants(Functional::V0), vol) {
            out.insert("v0".into(), FunctionalEstimate { value: 2.0 * std::f64::consts::PI * chi + v.value, ..v });
        }
    }
    Ok(())
}

fn required_samples(values: &[f64], ses: &[f64], n0: usize, max: usize) -> usize {
    let mc: Vec<f64> = ses.iter().map(|s| s * s).collect();
    let mc = stats::mean(&mc);
    let between = stats::variance(values) - mc;
    if !(between > 0.0) || !(mc > 0.0) {
        return n0;
    }
    let n = (n0 as f64 * mc / (NOISE_RATIO * NOISE_RATIO * between)).ceil();
    (n as usize).clamp(n0, max)
}

/// Picks estimator sample sizes so that estimator noise is at most a tenth of
/// the between-replicate standard deviation, from a 20-replicate pilot.
pub fn tune_sample_sizes(cfg: &ExperimentConfig) -> Result<SampleSizes> {
    let need_vol = cfg.needs_volume() && cfg.volume_samples.is_none();
    let need_surf = cfg.wants(Functional::Surface) && cfg.surface_samples.is_none();
    let mut sizes = SampleSizes {
        volume: cfg.volume_samples.unwrap_or(PILOT_VOLUME_SAMPLES),
        surface: cfg.surface_samples.unwrap_or(PILOT_SURFACE_SAMPLES),
        tuned: need_vol || need_surf,
    };
    if !sizes.tuned {
        return Ok(sizes);
    }
    let mut pilot_cfg = cfg.clone();
    pilot_cfg.functionals = [(need_vol, Functional::Volume), (need_surf, Functional::Surface)]
        .iter()
        .filter(|(w, _)| *w)
        .map(|&(_, f)| f)
        .collect();
    let pilot_sizes = SampleSizes { volume: PILOT_VOLUME_SAMPLES, surface: PILOT_SURFACE_SAMPLES, tuned: false };
    let records: Vec<ReplicateRecord> = (0..PILOT_REPLICATES)
        .into_par_iter()
        .map(|r| run_replicate(&pilot_cfg, replicate_seed(cfg.master_seed ^ PILOT_SALT, r), pilot_sizes))
        .collect();
    let pick = |name: &str| -> (Vec<f64>, Vec<f64>) {
        records.iter().filter_map(|r| r.values.get(name)).map(|e| (e.value, e.std_error)).unzip()
    };
    if need_vol {
        let (v, s) = pick("volume");
        sizes.volume = required_samples(&v, &s, PILOT_VOLUME_SAMPLES, MAX_VOLUME_SAMPLES);
    }
    if need_surf {
        let (v, s) = pick("surface");
        sizes.surface = required_samples(&v, &s, PILOT_SURFACE_SAMPLES, MAX_SURFACE_SAMPLES);
    }
    Ok(sizes)
}

/// Runs all replicates; record `r` uses seed `master ^ r`.
pub fn run_replicates(cfg: &ExperimentConfig) -> Result<(SampleSizes, Vec<ReplicateRecord>)> {
    cfg.validate()?;
    let sizes = tune_sample_sizes(cfg)?;
    let records = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| run_replicate(cfg, replicate_seed(cfg.master_seed, r), sizes))
        .collect();
    Ok((sizes, records))
}

/// Theory mean of each functional over the window `B_R`.
pub fn theory_mean(params: &ModelParams, window: f64, f: Functional) -> Result<f64> {
    let space = params.space();
    let gm = grain_moments(params)?;
    let g = params.gamma;
    let vol = space.ball_volume(window)?;
    match f {
        Functional::Volume => Ok(mean_volume(vol, &gm, g)),
        Functional::Surface => Ok(mean_surface(vol, space.sphere_area(window)?, &gm, g)),
        Functional::Euler => {
            let w = ball_v0(&space, window)?;
            if params.d != 2 {
                return Err(Error::Unsupported("mean Euler characteristic needs d = 2".into()));
            }
            mean_euler_2d(w[1], w[2], &gm, g)
        }
        Functional::V0 => Ok(mean_intrinsic_k0(0, &ball_v0(&space, window)?, &gm, g)? / space.renorm_const(0)),
    }
}

/// Values and standard errors of one functional over the successful records.
pub fn column(records: &[ReplicateRecord], name: &str) -> (Vec<f64>, Vec<f64>) {
    records.iter().filter_map(|r| r.values.get(name)).map(|e| (e.value, e.std_error)).unzip()
}

/// Variance corrected for estimator noise.
pub(crate) fn corrected_variance(values: &[f64], ses: &[f64]) -> f64 {
    let mc: Vec<f64> = ses.iter().map(|s| s * s).collect();
    stats::variance(values) - stats::mean(&mc)
}

pub fn summarize(cfg: &ExperimentConfig, sizes: SampleSizes, records: &[ReplicateRecord], runtime_seconds: f64) -> Result<SummaryReport> {
    let failures: Vec<(u64, String)> = records.iter().filter_map(|r| r.error.clone().map(|e| (r.seed, e))).collect();
    let ok = records.len() - failures.len();
    let mut functionals = BTreeMap::new();
    let mut notes: Vec<String> = NOTES.iter().map(|s| s.to_string()).collect();
    let mut boot_rng = stream_rng(cfg.master_seed, stream::AUX);
    for &f in &cfg.functionals {
        let (values, ses) = column(records, f.name());
        let n = values.len();
        if n == 0 {
            continue;
        }
        let theory_mean = theory_mean(&cfg.params, cfg.window_radius, f)?;
        let m = stats::mean(&values);
        let var = if n > 1 { stats::variance(&values) } else { 0.0 };
        let mc: Vec<f64> = ses.iter().map(|s| s * s).collect();
        let mean_estimator_var = stats::mean(&mc);
        let se = (var / n as f64).sqrt();
        let diff = m - theory_mean;
        // a difference below rounding with zero spread counts as agreement
        let z_score = if se > 0.0 {
            Some(diff / se)
        } else if diff.abs() <= 1e-9 * theory_mean.abs().max(1.0) {
            Some(0.0)
        } else {
            None
        };
        let (mut theory_var, mut var_ci_99, mut var_in_ci) = (None, None, None);
        if f == Functional::Volume && n > 1 {
            let tv = Theory::new(&cfg.params)?.var_volume_exact(cfg.window_radius)?;
            let ci = bootstrap_ci(n, BOOTSTRAP_RESAMPLES, 0.99, &mut boot_rng, |idx| corrected_variance(&gather(&values, idx), &gather(&ses, idx)));
            theory_var = Some(tv);
            var_ci_99 = Some(ci);
            var_in_ci = Some((ci.0 <= tv && tv <= ci.1) || (tv == 0.0 && var == 0.0));
        }
        let (mut normality_stat, mut normality_pass, mut normality_note) = (None, None, None);
        if cfg.normality && n >= MIN_NORMALITY_SAMPLES {
            match stats::clt_test(&values) {
                Ok(r) => {
                    normality_stat = Some(r.statistic);
                    normality_pass = Some(r.pass);
                }
                Err(e) => normality_note = Some(e.to_string()),
            }
        } else if cfg.normality {
            normality_note = Some(format!("skipped: fewer than {MIN_NORMALITY_SAMPLES} replicates"));
        }
        functionals.insert(
            f.name().to_string(),
            FunctionalSummary {
                n,
                empirical_mean: m,
                empirical_var: var,
                mean_estimator_var,
                corrected_var: var - mean_estimator_var,
                theory_mean,
                mean_std_error: se,
                z_score,
                theory_var,
                var_ci_99,
                var_in_ci,
                normality_stat,
                normality_pass,
                normality_note,
            },
        );
    }
    if !failures.is_empty() {
        notes.push(format!("{} replicates failed and are excluded", failures.len()));
    }
    Ok(SummaryReport { config: cfg.clone(), sample_sizes: sizes, functionals, replicates_ok: ok, failures, notes, runtime_seconds })
}

/// Runs an experiment and returns the summary together with the records.
pub fn run_experiment_with_records(cfg: &ExperimentConfig) -> Result<(SummaryReport, Vec<ReplicateRecord>)> {
    let start = Instant::now();
    let (sizes, records) = run_replicates(cfg)?;
    let report = summarize(cfg, sizes, &records, start.elapsed().as_secs_f64())?;
    Ok((report, records))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SummaryReport> {
    run_experiment_with_records(cfg).map(|(r, _)| r)
}

/// Per-replicate CSV with columns `seed,R,functional,value,se`.
pub fn records_csv(records: &[ReplicateRecord]) -> String {
    let mut out = String::from("seed,R,functional,value,se\n");
    for r in records {
        for (name, e) in &r.values {
            let _ = writeln!(out, "{},{:.16e},{},{:.16e},{:.16e}", r.seed, r.window_radius, name, e.value, e.std_error);
        }
        if let Some(err) = &r.error {
            let _ = writeln!(out, "{},{:.16e},error,NaN,NaN # {}", r.seed, r.window_radius, err.replace(['\n', ','], " "));
        }
    }
    out
}

pub fn report_json(report: &impl Serialize) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Numeric(e.to_string()))
}

#[cfg(test)]
mod tests;
