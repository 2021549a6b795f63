//! Scan configuration: an optional JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Mode {
    /// Single-site magnetizations and RoM over (λ, γ).
    SingleSiteSweep,
    /// Symmetric two-site correlators and RoM over (λ, γ, T, r).
    TwoSiteThermal,
    /// Symmetry-broken pair from exact diagonalization over (N, λ, γ, r).
    TwoSiteBrokenEd,
    /// Magic pseudocritical point per γ.
    Mpp,
    /// Finite-size scans and data collapse.
    Fss,
    /// Sudden-death temperature per (γ, r) at λ = 1.
    SuddenDeath,
    /// Finite-temperature crossover map.
    CrossoverMap,
    /// Stabilizer states as JSON.
    PolytopeDump,
}

/// Everything a run depends on. Grids are kept in their textual form so
/// the echoed configuration can be fed back unchanged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub mode: Option<Mode>,
    pub lambda: Option<String>,
    pub gamma: Option<String>,
    pub temperature: Option<String>,
    pub r: Option<String>,
    pub n: Option<String>,
    pub output: Option<PathBuf>,
    pub quad_tol: Option<f64>,
    pub threshold: Option<f64>,
    pub resolution: Option<f64>,
    pub sb_field: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl ScanConfig {
    /// `other`'s fields win wherever they are set.
    pub fn overlay(self, other: ScanConfig) -> ScanConfig {
        ScanConfig {
            mode: other.mode.or(self.mode),
            lambda: other.lambda.or(self.lambda),
            gamma: other.gamma.or(self.gamma),
            temperature: other.temperature.or(self.temperature),
            r: other.r.or(self.r),
            n: other.n.or(self.n),
            output: other.output.or(self.output),
            quad_tol: other.quad_tol.or(self.quad_tol),
            threshold: other.threshold.or(self.threshold),
            resolution: other.resolution.or(self.resolution),
            sb_field: other.sb_field.or(self.sb_field),
            seed: other.seed.or(self.seed),
            threads: other.threads.or(self.threads),
        }
    }

    pub fn from_file(path: &Path) -> Result<ScanConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fills per-mode defaults and checks every field.
    pub fn resolve(self) -> Result<Resolved, CliError> {
        let mode = self.mode.ok_or_else(|| CliError::Usage("no mode given (--mode or config `mode`)".into()))?;
        let d = Defaults::for_mode(mode);
        let mut cfg = self;
        let fill = |v: Option<String>, def: Option<&str>| v.or(def.map(str::to_owned));
        cfg.lambda = fill(cfg.lambda, d.lambda);
        cfg.gamma = fill(cfg.gamma, d.gamma);
        cfg.temperature = fill(cfg.temperature, d.temperature);
        cfg.r = fill(cfg.r, d.r);
        cfg.n = fill(cfg.n, d.n);
        cfg.quad_tol = cfg.quad_tol.or(Some(xymagic::correlators::DEFAULT_QUAD_TOL));
        cfg.threshold = cfg.threshold.or(Some(xymagic::rom::NONZERO_THRESHOLD));
        cfg.resolution = cfg.resolution.or(Some(d.resolution));
        cfg.sb_field = cfg.sb_field.or(Some(xymagic::chain::PINNING_FIELD));
        cfg.seed = cfg.seed.or(Some(0));

        let grid = |name: &str, v: &Option<String>| -> Result<Vec<f64>, CliError> {
            let s = v
                .as_deref()
                .ok_or_else(|| CliError::Usage(format!("mode {mode:?} needs --{name}")))?;
            let g: Grid = s.parse().map_err(|e| CliError::Usage(format!("--{name}: {e}")))?;
            Ok(g.values())
        };
        let ints = |name: &str, v: &Option<String>| -> Result<Vec<usize>, CliError> {
            let s = v
                .as_deref()
                .ok_or_else(|| CliError::Usage(format!("mode {mode:?} needs --{name}")))?;
            let g: Grid = s.parse().map_err(|e| CliError::Usage(format!("--{name}: {e}")))?;
            g.integers().map_err(|e| CliError::Usage(format!("--{name}: {e}")))
        };
        let positive = |name: &str, v: Option<f64>| -> Result<f64, CliError> {
            match v {
                Some(x) if x.is_finite() && x > 0.0 => Ok(x),
                _ => Err(CliError::Usage(format!("--{name} must be positive"))),
            }
        };

        let lambdas = if d.lambda.is_some() { grid("lambda", &cfg.lambda)? } else { Vec::new() };
        let gammas = if d.gamma.is_some() { grid("gamma", &cfg.gamma)? } else { Vec::new() };
        let temperatures = if d.temperature.is_some() {
            grid("temperature", &cfg.temperature)?
        } else {
            Vec::new()
        };
        let distances = if d.r.is_some() { ints("r", &cfg.r)? } else { Vec::new() };
        let sizes = if d.n.is_some() { ints("n", &cfg.n)? } else { Vec::new() };
        let resolved = Resolved {
            mode,
            lambdas,
            gammas,
            temperatures,
            distances,
            sizes,
            quad_tol: positive("quad-tol", cfg.quad_tol)?,
            threshold: positive("threshold", cfg.threshold)?,
            resolution: positive("resolution", cfg.resolution)?,
            sb_field: cfg.sb_field.filter(|x| x.is_finite() && *x >= 0.0).ok_or_else(|| {
                CliError::Usage("--sb-field must be nonnegative".into())
            })?,
            config: cfg,
        };
        resolved.check()?;
        Ok(resolved)
    }
}

/// Grid defaults per mode; `None` means the axis is not used.
struct Defaults {
    lambda: Option<&'static str>,
    gamma: Option<&'static str>,
    temperature: Option<&'static str>,
    r: Option<&'static str>,
    n: Option<&'static str>,
    resolution: f64,
}

impl Defaults {
    fn for_mode(mode: Mode) -> Defaults {
        let none = Defaults {
            lambda: None,
            gamma: None,
            temperature: None,
            r: None,
            n: None,
            resolution: 1e-6,
        };
        match mode {
            Mode::SingleSiteSweep => Defaults {
                lambda: Some("0:2:0.01"),
                gamma: Some("1"),
                ..none
            },
            Mode::TwoSiteThermal => Defaults {
                lambda: Some("0:2:0.01"),
                gamma: Some("1"),
                temperature: Some("0"),
                r: Some("1"),
                ..none
            },
            Mode::TwoSiteBrokenEd => Defaults {
                lambda: Some("0.5:1.5:0.05"),
                gamma: Some("1"),
                r: Some("1"),
                n: Some("16"),
                ..none
            },
            Mode::Mpp => Defaults {
                gamma: Some("1"),
                ..none
            },
            Mode::Fss => Defaults {
                lambda: Some("0.6:1.5:0.025"),
                gamma: Some("1"),
                n: Some("8:20:4"),
                ..none
            },
            Mode::SuddenDeath => Defaults {
                gamma: Some("1"),
                r: Some("1:10:1"),
                ..none
            },
            Mode::CrossoverMap => Defaults {
                lambda: Some("0.705:1.295:0.01"),
                gamma: Some("1"),
                temperature: Some("0.01:0.6:0.01"),
                r: Some("1"),
                ..none
            },
            Mode::PolytopeDump => Defaults {
                n: Some("2"),
                ..none
            },
        }
    }
}

/// A validated configuration with grids expanded.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub mode: Mode,
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub distances: Vec<usize>,
    pub sizes: Vec<usize>,
    pub quad_tol: f64,
    pub threshold: f64,
    pub resolution: f64,
    pub sb_field: f64,
    /// The effective configuration, echoed into the sidecar.
    pub config: ScanConfig,
}

impl Resolved {
    fn check(&self) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.into()));
        if self.lambdas.iter().any(|&l| l < 0.0) {
            return usage("lambda must be nonnegative");
        }
        if self.gammas.iter().any(|&g| !(0.0..=1.0).contains(&g)) {
            return usage("gamma must lie in [0, 1]");
        }
        if self.temperatures.iter().any(|&t| t < 0.0) {
            return usage("temperature must be nonnegative");
        }
        if self.distances.contains(&0) {
            return usage("r must be at least 1");
        }
        match self.mode {
            Mode::PolytopeDump if self.sizes.len() != 1 || !(1..=2).contains(&self.sizes[0]) => {
                usage("polytope_dump needs a single --n of 1 or 2")
            }
            Mode::Fss if self.sizes.len() < 3 => usage("fss needs at least 3 sizes in --n"),
            Mode::Fss | Mode::CrossoverMap if self.gammas.len() != 1 => usage("this mode takes a single --gamma"),
            Mode::CrossoverMap if self.distances.len() != 1 => usage("crossover_map takes a single --r"),
            Mode::CrossoverMap if self.temperatures.contains(&0.0) => {
                usage("crossover_map temperatures must be positive")
            }
            Mode::SuddenDeath if self.distances.len() < 2 => usage("sudden_death needs at least 2 distances"),
            Mode::Fss | Mode::TwoSiteBrokenEd
                if self.sizes.iter().any(|n| !(xymagic::chain::MIN_SITES..=xymagic::chain::MAX_SITES).contains(n)) =>
            {
                usage("chain sizes must lie in [2, 20]")
            }
            _ => Ok(()),
        }
    }
}

/// Command-line flags; every value flag overrides the config file.
#[derive(Debug, Parser)]
#[command(name = "xymagic", version, about = "Robustness-of-magic scans of the transverse-field XY chain")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Transverse coupling ratio grid.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Anisotropy grid.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Temperature grid.
    #[arg(long)]
    pub temperature: Option<String>,
    /// Pair separation grid (integers).
    #[arg(long)]
    pub r: Option<String>,
    /// Chain sizes, or qubit count for polytope_dump.
    #[arg(long)]
    pub n: Option<String>,
    /// Output file; results go to stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub quad_tol: Option<f64>,
    /// Nonzero-magic threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Abscissa resolution of bisections.
    #[arg(long)]
    pub resolution: Option<f64>,
    /// End-site pinning field for exact diagonalization.
    #[arg(long)]
    pub sb_field: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to XYMAGIC_THREADS, then all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Cli {
    pub fn flags(&self) -> ScanConfig {
        ScanConfig {
            mode: self.mode,
            lambda: self.lambda.clone(),
            gamma: self.gamma.clone(),
            temperature: self.temperature.clone(),
            r: self.r.clone(),
            n: self.n.clone(),
            output: self.output.clone(),
            quad_tol: self.quad_tol,
            threshold: self.threshold,
            resolution: self.resolution,
            sb_field: self.sb_field,
            seed: self.seed,
            threads: self.threads,
        }
    }

    /// Config file overlaid by flags.
    pub fn effective(&self) -> Result<ScanConfig, CliError> {
        let base = match &self.config {
            Some(p) => ScanConfig::from_file(p)?,
            None => ScanConfig::default(),
        };
        Ok(base.overlay(self.flags()))
    }
}
