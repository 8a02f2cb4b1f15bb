use super::*;
use crate::process::RadiusDistribution;
use crate::theory::Theory;

fn planar_default() -> ModelParams {
    let space = crate::hypcore::Space::new(2).unwrap();
    let gamma = 500.0 / space.ball_volume(5.0).unwrap();
    ModelParams::new(2, gamma, RadiusDistribution::uniform(0.0, 1.0).unwrap()).unwrap()
}

#[test]
fn zero_intensity_is_trivially_passing() {
    let p = ModelParams::new(2, 0.0, RadiusDistribution::fixed(1.0).unwrap()).unwrap();
    let mut cfg = ExperimentConfig::new(p, 3.0, 120, 1, &[Functional::Volume, Functional::Surface, Functional::Euler, Functional::V0]);
    cfg.volume_samples = Some(100);
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.functionals.len(), 4);
    for s in report.functionals.values() {
        assert_eq!(s.empirical_mean, 0.0);
        assert_eq!(s.theory_mean, 0.0);
        assert_eq!(s.z_score, Some(0.0));
        assert!(s.normality_note.is_some());
    }
    assert!(report.passed());
}

#[test]
fn reports_are_reproducible() {
    let mut cfg = ExperimentConfig::new(planar_default(), 2.0, 12, 77, &[Functional::Volume, Functional::Surface, Functional::Euler]);
    cfg.surface_samples = Some(50);
    let (mut a, ra) = run_experiment_with_records(&cfg).unwrap();
    let (mut b, rb) = run_experiment_with_records(&cfg).unwrap();
    a.runtime_seconds = 0.0;
    b.runtime_seconds = 0.0;
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    assert!(a.sample_sizes.tuned);
    assert_eq!(a.sample_sizes.surface, 50);
    assert!(a.sample_sizes.volume >= PILOT_VOLUME_SAMPLES);
    let other = run_experiment(&ExperimentConfig { master_seed: 78, ..cfg }).unwrap();
    assert_ne!(other.functionals["volume"].empirical_mean, a.functionals["volume"].empirical_mean);
}

#[test]
fn small_window_means_agree() {
    let mut cfg = ExperimentConfig::new(planar_default(), 2.5, 150, 5, &[Functional::Volume, Functional::Surface, Functional::Euler, Functional::V0]);
    cfg.surface_samples = Some(200);
    let report = run_experiment(&cfg).unwrap();
    for (name, s) in &report.functionals {
        assert!(s.z_score.is_some_and(|z| z.abs() <= 3.0), "{name}: {s:?}");
    }
    let v = &report.functionals["volume"];
    assert!(v.var_in_ci.unwrap(), "{v:?}");
}

#[test]
fn replicate_errors_are_marked() {
    let mut cfg = ExperimentConfig::new(planar_default(), 3.0, 3, 1, &[Functional::Volume]);
    cfg.count_cap = 1.0;
    cfg.volume_samples = Some(10);
    let (report, records) = run_experiment_with_records(&cfg).unwrap();
    assert_eq!(report.failures.len(), 3);
    assert!(!report.passed());
    assert!(records.iter().all(|r| r.error.as_deref().is_some_and(|e| e.contains("resource"))));
    assert!(records_csv(&records).lines().nth(1).unwrap().contains("error"));
}

#[test]
fn config_validation() {
    let p3 = ModelParams::new(3, 0.1, RadiusDistribution::fixed(1.0).unwrap()).unwrap();
    assert!(ExperimentConfig::new(p3, 2.0, 10, 0, &[Functional::Euler]).validate().is_err());
    assert!(ExperimentConfig::new(p3, 2.0, 0, 0, &[Functional::Volume]).validate().is_err());
    assert!(ExperimentConfig::new(p3, -1.0, 10, 0, &[Functional::Volume]).validate().is_err());
    assert!(ExperimentConfig::new(p3, 1.0, 10, 0, &[]).validate().is_err());
    assert_eq!(Functional::parse("v0"), Some(Functional::V0));
    assert_eq!(Functional::parse("area"), None);
}

#[test]
fn csv_and_json_output() {
    let mut cfg = ExperimentConfig::new(planar_default(), 1.5, 2, 3, &[Functional::Volume, Functional::Euler]);
    cfg.volume_samples = Some(100);
    let (report, records) = run_experiment_with_records(&cfg).unwrap();
    let csv = records_csv(&records);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("seed,R,functional,value,se"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 5);
    assert_eq!(row[0], "3");
    let v: f64 = row[3].parse().unwrap();
    assert_eq!(v, records[0].values[row[2]].value);
    let json = report_json(&report).unwrap();
    let back: SummaryReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
}

#[test]
fn variance_scan_small_intensity() {
    let p = ModelParams::new(2, 0.02, RadiusDistribution::fixed(1.0).unwrap()).unwrap();
    let mut cfg = ExperimentConfig::new(p, 2.0, 400, 9, &[Functional::Volume]);
    cfg.normality = false;
    let scan = variance_scan(&cfg, &[2.0, 3.0]).unwrap();
    // linearization: Var / Vol ~ gamma int C(s) P(s) dz as gamma -> 0
    let g = 1e-5;
    let t = Theory::new(&ModelParams { gamma: g, ..p }).unwrap();
    let sp = p.space();
    let lin = 2.0
        * std::f64::consts::PI
        * crate::quadrature::integrate(|s| t.covariogram().eval(s) * crate::hypcore::horoball_hit_prob(&sp, s).unwrap() * s.sinh(), 0.0, 2.0).unwrap();
    assert!(((t.var_volume_asymptotic().unwrap() / g - lin) / lin).abs() < 1e-3);
    for row in &scan.rows {
        assert!(row.ratio > 0.0 && row.theory_ratio > 0.0);
        assert!(row.ci_95.0 <= row.theory_ratio && row.theory_ratio <= row.ci_95.1, "{row:?}");
    }
    assert!(variance_scan(&cfg, &[3.0, 2.0]).is_err());
}

#[test]
fn multivariate_guards() {
    let p = ModelParams::new(2, 0.0, RadiusDistribution::fixed(1.0).unwrap()).unwrap();
    let cfg = ExperimentConfig::new(p, 2.0, 500, 1, &[Functional::Volume]);
    assert!(multivariate_check(&cfg).unwrap().skipped.is_some());
    assert!(multivariate_check(&ExperimentConfig { replicates: 10, ..cfg }).is_err());
}
