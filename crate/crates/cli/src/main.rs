//! `hypbool`: simulate Boolean models in hyperbolic space and check them against theory.
//!
//! Exit codes: 0 success, 1 failed check or runtime error, 2 configuration error.

mod config;
mod dump;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use hypbool::covering::{Covering, VerifyOptions};
use hypbool::experiments::{
    joint_summary, records_csv, report_json, run_experiment_with_records, theory_mean, variance_scan, Functional, MultivariateReport,
    SummaryReport, VarianceScan,
};
use hypbool::hypcore::Space;
use hypbool::process::sample_realization;
use hypbool::theory::{kinematic_check, KinematicReport, Theory};
use serde::Serialize;

use config::{Config, ConfigError};

const KINEMATIC_TOL: f64 = 1e-6;
const JOINT_MIN_REPLICATES: usize = 500;

#[derive(Parser)]
#[command(name = "hypbool", version, about = "Boolean models of ball grains in hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicates and compare empirical means, variances and normality with theory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print closed-form means and variances for a configuration.
    Theory {
        #[arg(long)]
        config: PathBuf,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Check the dyadic covering of the upper half-space.
    #[command(alias = "cover-verify")]
    VerifyCover {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1_000_000)]
        points: usize,
        #[arg(long, default_value_t = 10_000)]
        box_checks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the principal kinematic formula on pairs of balls.
    Kinematic {
        /// Restrict to one dimension; default checks d = 2 and d = 3.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Simulate, then add the surface-volume covariance check and the variance scan.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write one realization with boundary polylines in Poincaré-ball coordinates.
    DumpRealization {
        #[arg(long)]
        config: PathBuf,
        /// Output file; defaults to `output_txt` from the config, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<hypbool::Error> for Failure {
    fn from(e: hypbool::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = set_threads().and_then(|()| run(cli.command));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn set_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("HYPBOOL_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Failure::Config(format!("HYPBOOL_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(report_json(v)? + "\n")
}

#[derive(Serialize)]
struct Output<'a, T: Serialize> {
    config: String,
    #[serde(flatten)]
    body: &'a T,
}

fn run(cmd: Command) -> Result<bool, Failure> {
    match cmd {
        Command::Simulate { config } => {
            let cfg = Config::load(&config)?;
            let (report, records) = run_experiment_with_records(&cfg.experiment())?;
            write_simulation(&cfg, &Output { config: cfg.echo(), body: &SimulateBody { report: &report } }, &records)?;
            print_summary(&report);
            Ok(report.passed())
        }
        Command::Theory { config, json: as_json } => {
            let cfg = Config::load(&config)?;
            let table = theory_table(&cfg)?;
            if as_json {
                let map: serde_json::Map<String, serde_json::Value> = table.iter().map(|(k, v)| (k.to_string(), serde_json::json!(v))).collect();
                emit(None, &json(&Output { config: cfg.echo(), body: &map })?)?;
            } else {
                let mut s = cfg.echo_commented();
                for (k, v) in &table {
                    s += &format!("{k:<24} {v:.16e}\n");
                }
                emit(None, &s)?;
            }
            Ok(true)
        }
        Command::VerifyCover { dim, points, box_checks, seed } => {
            let cover = Covering::new(dim).map_err(|e| Failure::Config(e.to_string()))?;
            let opts = VerifyOptions { box_checks, ..VerifyOptions::default() };
            let report = cover.verify(points, seed, &opts)?;
            #[derive(Serialize)]
            struct Body<'a> {
                #[serde(flatten)]
                report: &'a hypbool::covering::CoverReport,
                per_decade_constant: bool,
                passed: bool,
            }
            emit(None, &json(&Body { report: &report, per_decade_constant: report.per_decade_constant(), passed: report.passed() })?)?;
            Ok(report.passed())
        }
        Command::Kinematic { dim } => {
            let dims = match dim {
                Some(d) => vec![d],
                None => vec![2, 3],
            };
            let mut reports: Vec<KinematicReport> = Vec::new();
            for d in dims {
                let space = Space::new(d).map_err(|e| Failure::Config(e.to_string()))?;
                let ks: Vec<usize> = if d == 2 { vec![0, 1, 2] } else { vec![d - 1, d] };
                for k in ks {
                    for (a, b) in [(1.0, 1.0), (0.5, 2.0), (1.5, 0.3)] {
                        reports.push(kinematic_check(&space, k, a, b)?);
                    }
                }
            }
            let ok = reports.iter().all(|r| r.rel_error <= KINEMATIC_TOL);
            emit(None, &json(&reports)?)?;
            Ok(ok)
        }
        Command::Report { config } => {
            let cfg = Config::load(&config)?;
            let exp = cfg.experiment();
            let (report, records) = run_experiment_with_records(&exp)?;
            let joint = if cfg.functionals.contains(&Functional::Volume) && cfg.functionals.contains(&Functional::Surface) && cfg.replicates >= JOINT_MIN_REPLICATES {
                Some(joint_summary(&exp, &Theory::new(&exp.params)?, &records)?)
            } else {
                None
            };
            let scan = if cfg.scan_r.is_empty() { None } else { Some(variance_scan(&exp, &cfg.scan_r)?) };
            let passed = report.passed() && joint.as_ref().is_none_or(|j| j.pass) && scan.as_ref().is_none_or(|s| s.bounded);
            let body = ReportBody { report: &report, joint: joint.as_ref(), scan: scan.as_ref(), passed };
            write_simulation(&cfg, &Output { config: cfg.echo(), body: &body }, &records)?;
            print_summary(&report);
            if let Some(j) = &joint {
                eprintln!("surface-volume covariance: z = {:.3}, pass = {}", j.cov_z, j.pass);
            }
            if let Some(s) = &scan {
                eprintln!("variance scan: bounded = {}", s.bounded);
            }
            Ok(passed)
        }
        Command::DumpRealization { config, out } => {
            let cfg = Config::load(&config)?;
            if cfg.d != 2 && cfg.d != 3 {
                return Err(Failure::Config(format!("dump-realization needs d = 2 or d = 3, got d = {}", cfg.d)));
            }
            let real = sample_realization(&cfg.params()?, cfg.window_r, cfg.master_seed)?;
            let text = dump::render(&real, &cfg.echo_commented())?;
            emit(out.as_deref().or(cfg.output_txt.as_deref()), &text)?;
            Ok(true)
        }
    }
}

#[derive(Serialize)]
struct SimulateBody<'a> {
    report: &'a SummaryReport,
}

#[derive(Serialize)]
struct ReportBody<'a> {
    report: &'a SummaryReport,
    joint: Option<&'a MultivariateReport>,
    scan: Option<&'a VarianceScan>,
    passed: bool,
}

fn write_simulation<T: Serialize>(cfg: &Config, out: &T, records: &[hypbool::experiments::ReplicateRecord]) -> anyhow::Result<()> {
    emit(cfg.output_json.as_deref(), &json(out)?)?;
    if let Some(p) = &cfg.output_csv {
        emit(Some(p), &(cfg.echo_commented() + &records_csv(records)))?;
    }
    Ok(())
}

fn print_summary(report: &SummaryReport) {
    for (name, s) in &report.functionals {
        let z = s.z_score.map_or("n/a".to_string(), |z| format!("{z:.3}"));
        eprintln!("{name}: mean {:.6e} theory {:.6e} z {z} pass {}", s.empirical_mean, s.theory_mean, s.passed());
    }
    for (seed, e) in &report.failures {
        eprintln!("replicate seed {seed} failed: {e}");
    }
}

fn theory_table(cfg: &Config) -> anyhow::Result<Vec<(&'static str, f64)>> {
    let params = cfg.params()?;
    let space = params.space();
    let r = cfg.window_r;
    let vol = space.ball_volume(r)?;
    let mean_vol = theory_mean(&params, r, Functional::Volume)?;
    let mut rows = vec![
        ("gamma", params.gamma),
        ("window_volume", vol),
        ("mean_volume", mean_vol),
        ("volume_fraction", mean_vol / vol),
        ("mean_surface", theory_mean(&params, r, Functional::Surface)?),
    ];
    if cfg.d == 2 {
        rows.push(("mean_euler", theory_mean(&params, r, Functional::Euler)?));
        rows.push(("mean_v0", theory_mean(&params, r, Functional::V0)?));
    }
    let th = Theory::new(&params)?;
    let var = th.var_volume_exact(r)?;
    rows.push(("var_volume", var));
    rows.push(("var_volume_per_volume", var / vol));
    rows.push(("var_volume_asymptotic", th.var_volume_asymptotic()?));
    rows.push(("var_volume_no_horoball", th.var_volume_no_horoball()?));
    Ok(rows)
}
