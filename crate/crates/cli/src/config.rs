//! Flat `key = value` configuration files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hypbool::experiments::{ExperimentConfig, Functional};
use hypbool::functionals::DEFAULT_CLIQUE_CAP;
use hypbool::hypcore::Space;
use hypbool::process::{ModelParams, RadiusDistribution};

pub const VALID_KEYS: [&str; 17] = [
    "d",
    "gamma",
    "grains_per_window",
    "window",
    "radius",
    "window_R",
    "replicates",
    "master_seed",
    "mc_samples",
    "surface_samples",
    "functionals",
    "normality",
    "clique_cap",
    "scan_R",
    "output_json",
    "output_csv",
    "output_txt",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intensity {
    Gamma(f64),
    /// `grains_per_window / Vol(B_window)`.
    PerWindow { grains: f64, window: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub d: usize,
    pub intensity: Intensity,
    pub radius: RadiusDistribution,
    pub window_r: f64,
    pub replicates: usize,
    pub master_seed: u64,
    pub mc_samples: Option<usize>,
    pub surface_samples: Option<usize>,
    pub functionals: Vec<Functional>,
    pub normality: bool,
    pub clique_cap: usize,
    pub scan_r: Vec<f64>,
    pub output_json: Option<PathBuf>,
    pub output_csv: Option<PathBuf>,
    pub output_txt: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError(format!("{key}: cannot parse '{v}'")))
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected 'key = value'", n + 1));
            };
            let (k, v) = (k.trim(), v.trim());
            if !VALID_KEYS.contains(&k) {
                return err(format!("unknown key '{k}'; valid keys: {}", VALID_KEYS.join(", ")));
            }
            if pairs.iter().any(|(p, _)| p == k) {
                return err(format!("duplicate key '{k}'"));
            }
            pairs.push((k.to_string(), v.to_string()));
        }
        let get = |k: &str| pairs.iter().find(|(p, _)| p == k).map(|(_, v)| v.as_str());
        let need = |k: &str| get(k).ok_or_else(|| ConfigError(format!("missing required key '{k}'")));

        let d: usize = num("d", need("d")?)?;
        let intensity = match (get("gamma"), get("grains_per_window"), get("window")) {
            (Some(g), None, None) => Intensity::Gamma(num("gamma", g)?),
            (None, Some(n), Some(w)) => Intensity::PerWindow { grains: num("grains_per_window", n)?, window: num("window", w)? },
            _ => return err("give either 'gamma' or both 'grains_per_window' and 'window'"),
        };
        let radius = parse_radius(need("radius")?)?;
        let functionals = match get("functionals") {
            None => vec![Functional::Volume, Functional::Surface],
            Some(s) => s
                .split([',', ' '])
                .filter(|t| !t.is_empty())
                .map(|t| Functional::parse(t).ok_or_else(|| ConfigError(format!("functionals: unknown functional '{t}'"))))
                .collect::<Result<_, _>>()?,
        };
        let cfg = Config {
            d,
            intensity,
            radius,
            window_r: num("window_R", need("window_R")?)?,
            replicates: get("replicates").map(|v| num("replicates", v)).transpose()?.unwrap_or(200),
            master_seed: get("master_seed").map(|v| num("master_seed", v)).transpose()?.unwrap_or(0),
            mc_samples: get("mc_samples").map(|v| num("mc_samples", v)).transpose()?,
            surface_samples: get("surface_samples").map(|v| num("surface_samples", v)).transpose()?,
            functionals,
            normality: get("normality").map(|v| num("normality", v)).transpose()?.unwrap_or(true),
            clique_cap: get("clique_cap").map(|v| num("clique_cap", v)).transpose()?.unwrap_or(DEFAULT_CLIQUE_CAP),
            scan_r: match get("scan_R") {
                None => Vec::new(),
                Some(s) => s.split([',', ' ']).filter(|t| !t.is_empty()).map(|t| num("scan_R", t)).collect::<Result<_, _>>()?,
            },
            output_json: get("output_json").map(PathBuf::from),
            output_csv: get("output_csv").map(PathBuf::from),
            output_txt: get("output_txt").map(PathBuf::from),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.d < 2 {
            return err(format!("d must be at least 2, got {}", self.d));
        }
        if Space::new(self.d).is_err() {
            return err(format!("unsupported dimension d = {}", self.d));
        }
        match self.intensity {
            Intensity::Gamma(g) if !(g > 0.0 && g.is_finite()) => return err(format!("gamma must be positive, got {g}")),
            Intensity::PerWindow { grains, window } if !(grains > 0.0 && grains.is_finite() && window > 0.0 && window.is_finite()) => {
                return err("grains_per_window and window must be positive")
            }
            _ => {}
        }
        if !(self.window_r > 0.0 && self.window_r.is_finite()) {
            return err(format!("window_R must be positive, got {}", self.window_r));
        }
        if self.replicates == 0 {
            return err("replicates must be at least 1");
        }
        if self.mc_samples == Some(0) || self.surface_samples == Some(0) {
            return err("sample counts must be positive");
        }
        if self.functionals.is_empty() {
            return err("functionals is empty");
        }
        self.params().map_err(|e| ConfigError(e.to_string()))?;
        self.experiment().validate().map_err(|e| ConfigError(e.to_string()))
    }

    pub fn gamma(&self) -> f64 {
        match self.intensity {
            Intensity::Gamma(g) => g,
            Intensity::PerWindow { grains, window } => {
                grains / Space::new(self.d).and_then(|s| s.ball_volume(window)).expect("validated dimension and window")
            }
        }
    }

    pub fn params(&self) -> hypbool::Result<ModelParams> {
        ModelParams::new(self.d, self.gamma(), self.radius)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        let params = self.params().expect("validated parameters");
        let mut e = ExperimentConfig::new(params, self.window_r, self.replicates, self.master_seed, &self.functionals);
        e.volume_samples = self.mc_samples;
        e.surface_samples = self.surface_samples;
        e.normality = self.normality;
        e.clique_cap = self.clique_cap;
        e
    }

    /// Canonical text form; [`Config::parse`] of it returns an equal config.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "d = {}", self.d);
        match self.intensity {
            Intensity::Gamma(g) => {
                let _ = writeln!(s, "gamma = {}", fmt_f(g));
            }
            Intensity::PerWindow { grains, window } => {
                let _ = writeln!(s, "grains_per_window = {}", fmt_f(grains));
                let _ = writeln!(s, "window = {}", fmt_f(window));
            }
        }
        let _ = match self.radius {
            RadiusDistribution::Fixed { r } => writeln!(s, "radius = fixed {}", fmt_f(r)),
            RadiusDistribution::Uniform { a, b } => writeln!(s, "radius = uniform {} {}", fmt_f(a), fmt_f(b)),
        };
        let _ = writeln!(s, "window_R = {}", fmt_f(self.window_r));
        let _ = writeln!(s, "replicates = {}", self.replicates);
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        if let Some(n) = self.mc_samples {
            let _ = writeln!(s, "mc_samples = {n}");
        }
        if let Some(n) = self.surface_samples {
            let _ = writeln!(s, "surface_samples = {n}");
        }
        let names: Vec<&str> = self.functionals.iter().map(|f| f.name()).collect();
        let _ = writeln!(s, "functionals = {}", names.join(","));
        let _ = writeln!(s, "normality = {}", self.normality);
        let _ = writeln!(s, "clique_cap = {}", self.clique_cap);
        if !self.scan_r.is_empty() {
            let grid: Vec<String> = self.scan_r.iter().map(|&r| fmt_f(r)).collect();
            let _ = writeln!(s, "scan_R = {}", grid.join(","));
        }
        for (k, p) in [("output_json", &self.output_json), ("output_csv", &self.output_csv), ("output_txt", &self.output_txt)] {
            if let Some(p) = p {
                let _ = writeln!(s, "{k} = {}", p.display());
            }
        }
        s
    }

    /// The echo with every line prefixed by `# `.
    pub fn echo_commented(&self) -> String {
        self.echo().lines().map(|l| format!("# {l}\n")).collect()
    }
}

fn parse_radius(v: &str) -> Result<RadiusDistribution, ConfigError> {
    let parts: Vec<&str> = v.split_whitespace().collect();
    let r = match parts.as_slice() {
        ["fixed", r] => RadiusDistribution::fixed(num("radius", r)?),
        ["uniform", a, b] => RadiusDistribution::uniform(num("radius", a)?, num("radius", b)?),
        _ => return err(format!("radius: expected 'fixed r' or 'uniform a b', got '{v}'")),
    };
    r.map_err(|e| ConfigError(format!("radius: {e}")))
}
