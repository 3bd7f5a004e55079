//! Experiment configuration as flat `key = value` text.
//!
//! ```text
//! # full-scale SNR sweep
//! n_antennas = 256
//! sparsity = 16
//! m = 128
//! k = 32
//! rho = auto
//! snr_grid = 5,10,15,20,25
//! samples = 100
//! seed = 42
//! solvers = dc_gpsr,gpsr,ista,omp
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown and repeated keys are
//! rejected, and every error names the offending key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::sensing::MeasurementMatrix;
use crate::solvers::{default_rho, SolverKind, SolverOptions};

/// How the penalty weight `ρ` is chosen for each instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoRule {
    /// [`default_rho`] evaluated on the instance's `Φ`, `y` and noise level.
    Auto,
    Fixed(f64),
}

impl RhoRule {
    pub fn resolve(&self, phi: &MeasurementMatrix, y: &DVector<f64>, sigma: f64) -> Result<f64> {
        match *self {
            RhoRule::Auto => default_rho(phi, y, sigma),
            RhoRule::Fixed(rho) => Ok(rho),
        }
    }
}

impl fmt::Display for RhoRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoRule::Auto => f.write_str("auto"),
            RhoRule::Fixed(rho) => write!(f, "{rho}"),
        }
    }
}

impl FromStr for RhoRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            return Ok(RhoRule::Auto);
        }
        let rho: f64 = parse_value("rho", s)?;
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::config("rho", format!("must be `auto` or a positive number, got {rho}")));
        }
        Ok(RhoRule::Fixed(rho))
    }
}

/// One experiment: problem sizes, sample plan, solvers and their options.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Number of antennas `N`; the real-form unknown has length `2N`.
    pub n_antennas: usize,
    /// Nonzero complex entries per channel.
    pub sparsity: usize,
    pub m_measurements: usize,
    /// Sparsity bound on the real-form vector.
    pub k_real: usize,
    pub rho: RhoRule,
    /// Empty for a noiseless study.
    pub snr_grid_db: Vec<f64>,
    pub num_samples: usize,
    pub base_seed: u64,
    pub solvers: Vec<SolverKind>,
    pub solver_options: SolverOptions,
    /// Persist per-run trace CSVs.
    pub save_traces: bool,
    /// Persist `x_true` and every `x_hat`.
    pub save_vectors: bool,
}

impl Default for ExperimentConfig {
    /// Full-scale noiseless study with DC-GPSR and GPSR.
    fn default() -> Self {
        Self {
            n_antennas: 256,
            sparsity: 16,
            m_measurements: 128,
            k_real: 32,
            rho: RhoRule::Auto,
            snr_grid_db: Vec::new(),
            num_samples: 100,
            base_seed: 42,
            solvers: vec![SolverKind::DcGpsr, SolverKind::Gpsr],
            solver_options: SolverOptions::default(),
            save_traces: true,
            save_vectors: true,
        }
    }
}

const KEYS: &[&str] = &[
    "n_antennas",
    "sparsity",
    "m",
    "k",
    "rho",
    "snr_grid",
    "samples",
    "seed",
    "solvers",
    "outer_tol",
    "outer_max",
    "inner_tol",
    "inner_max",
    "alpha_min",
    "alpha_max",
    "lipschitz_margin",
    "save_traces",
    "save_vectors",
];

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.trim()
        .parse()
        .map_err(|e| Error::config(key, format!("cannot parse `{}`: {e}", raw.trim())))
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    let raw = raw.trim();
    if raw.is_empty() || raw == "none" {
        return Ok(Vec::new());
    }
    raw.split(',').map(|item| parse_value(key, item)).collect()
}

impl ExperimentConfig {
    /// Length of the real-form unknown, `2N`.
    pub fn n_real(&self) -> usize {
        2 * self.n_antennas
    }

    /// Parses config text on top of [`ExperimentConfig::default`]; `k`
    /// defaults to `2·sparsity` when absent. The result is validated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<&str, &str> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::config(key, format!("unknown key (expected one of {})", KEYS.join(", "))));
            }
            if entries.insert(key, value.trim()).is_some() {
                return Err(Error::config(key, "given more than once"));
            }
        }

        let mut cfg = Self::default();
        let opts = &mut cfg.solver_options;
        for (&key, &raw) in &entries {
            match key {
                "n_antennas" => cfg.n_antennas = parse_value(key, raw)?,
                "sparsity" => cfg.sparsity = parse_value(key, raw)?,
                "m" => cfg.m_measurements = parse_value(key, raw)?,
                "k" => cfg.k_real = parse_value(key, raw)?,
                "rho" => cfg.rho = raw.parse()?,
                "snr_grid" => cfg.snr_grid_db = parse_list(key, raw)?,
                "samples" => cfg.num_samples = parse_value(key, raw)?,
                "seed" => cfg.base_seed = parse_value(key, raw)?,
                "solvers" => cfg.solvers = parse_list(key, raw)?,
                "outer_tol" => opts.outer_tol = parse_value(key, raw)?,
                "outer_max" => opts.outer_max = parse_value(key, raw)?,
                "inner_tol" => opts.inner_tol = parse_value(key, raw)?,
                "inner_max" => opts.inner_max = parse_value(key, raw)?,
                "alpha_min" => opts.alpha_min = parse_value(key, raw)?,
                "alpha_max" => opts.alpha_max = parse_value(key, raw)?,
                "lipschitz_margin" => opts.lipschitz_margin = parse_value(key, raw)?,
                "save_traces" => cfg.save_traces = parse_value(key, raw)?,
                "save_vectors" => cfg.save_vectors = parse_value(key, raw)?,
                _ => unreachable!("key list and match arms disagree on `{key}`"),
            }
        }
        if !entries.contains_key("k") {
            cfg.k_real = 2 * cfg.sparsity;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses a config file; a missing file is reported with its path.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config { field, message } => Error::Parse {
                path: path.to_path_buf(),
                message: format!("`{field}`: {message}"),
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_antennas == 0 {
            return Err(Error::config("n_antennas", "must be >= 1"));
        }
        if self.sparsity == 0 || self.sparsity > self.n_antennas {
            return Err(Error::config(
                "sparsity",
                format!("must lie in 1..={}, got {}", self.n_antennas, self.sparsity),
            ));
        }
        if self.m_measurements == 0 || self.m_measurements >= self.n_real() {
            return Err(Error::config(
                "m",
                format!(
                    "must lie in 1..{} (fewer measurements than the 2N = {} real unknowns), got {}",
                    self.n_real(),
                    self.n_real(),
                    self.m_measurements
                ),
            ));
        }
        if self.k_real == 0 || self.k_real > self.n_real() {
            return Err(Error::config("k", format!("must lie in 1..={}, got {}", self.n_real(), self.k_real)));
        }
        if self.num_samples == 0 {
            return Err(Error::config("samples", "must be >= 1"));
        }
        if let Some(bad) = self.snr_grid_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::config("snr_grid", format!("SNR values must be finite, got {bad}")));
        }
        for (i, a) in self.snr_grid_db.iter().enumerate() {
            if self.snr_grid_db[..i].contains(a) {
                return Err(Error::config("snr_grid", format!("{a} dB listed more than once")));
            }
        }
        if self.solvers.is_empty() {
            return Err(Error::config("solvers", "need at least one solver"));
        }
        for (i, s) in self.solvers.iter().enumerate() {
            if self.solvers[..i].contains(s) {
                return Err(Error::config("solvers", format!("`{s}` listed more than once")));
            }
        }
        if self.solvers.contains(&SolverKind::Omp) && self.k_real > self.m_measurements {
            return Err(Error::config(
                "k",
                format!("OMP needs k <= m = {}, got {}", self.m_measurements, self.k_real),
            ));
        }
        self.solver_options.validate()
    }

    /// Config text that parses back to `self`.
    pub fn to_config_string(&self) -> String {
        let join = |items: Vec<String>| if items.is_empty() { "none".to_string() } else { items.join(",") };
        let o = &self.solver_options;
        let lines = [
            format!("n_antennas = {}", self.n_antennas),
            format!("sparsity = {}", self.sparsity),
            format!("m = {}", self.m_measurements),
            format!("k = {}", self.k_real),
            format!("rho = {}", self.rho),
            format!("snr_grid = {}", join(self.snr_grid_db.iter().map(|s| s.to_string()).collect())),
            format!("samples = {}", self.num_samples),
            format!("seed = {}", self.base_seed),
            format!("solvers = {}", join(self.solvers.iter().map(|s| s.to_string()).collect())),
            format!("outer_tol = {:e}", o.outer_tol),
            format!("outer_max = {}", o.outer_max),
            format!("inner_tol = {:e}", o.inner_tol),
            format!("inner_max = {}", o.inner_max),
            format!("alpha_min = {:e}", o.alpha_min),
            format!("alpha_max = {:e}", o.alpha_max),
            format!("lipschitz_margin = {}", o.lipschitz_margin),
            format!("save_traces = {}", self.save_traces),
            format!("save_vectors = {}", self.save_vectors),
        ];
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# full-scale sweep
n_antennas=256
sparsity=16
m=128
k=32
rho=auto
snr_grid=5,10,15,20,25
samples=100
seed=42
solvers=dc_gpsr,gpsr,ista,omp
";

    #[test]
    fn parses_the_documented_example() {
        let cfg = ExperimentConfig::parse(FULL).unwrap();
        assert_eq!(cfg.n_real(), 512);
        assert_eq!(cfg.k_real, 32);
        assert_eq!(cfg.rho, RhoRule::Auto);
        assert_eq!(cfg.snr_grid_db, vec![5.0, 10.0, 15.0, 20.0, 25.0]);
        assert_eq!(cfg.solvers.len(), 4);
        assert_eq!(cfg.base_seed, 42);
    }

    #[test]
    fn k_defaults_to_twice_the_sparsity() {
        let cfg = ExperimentConfig::parse("n_antennas=8\nsparsity=3\nm=10\nsnr_grid=none").unwrap();
        assert_eq!(cfg.k_real, 6);
        assert!(cfg.snr_grid_db.is_empty());
    }

    #[test]
    fn round_trips_through_text() {
        let mut cfg = ExperimentConfig::parse(FULL).unwrap();
        cfg.rho = RhoRule::Fixed(0.25);
        cfg.solver_options.inner_tol = 3e-17;
        cfg.save_traces = false;
        assert_eq!(ExperimentConfig::parse(&cfg.to_config_string()).unwrap(), cfg);
    }

    fn field_of(text: &str) -> String {
        match ExperimentConfig::parse(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of("colour = blue"), "colour");
        assert_eq!(field_of("seed = 1\nseed = 2"), "seed");
        assert_eq!(field_of("samples = many"), "samples");
        assert_eq!(field_of("samples = 0"), "samples");
        assert_eq!(field_of("m = 512"), "m");
        assert_eq!(field_of("k = 0"), "k");
        assert_eq!(field_of("sparsity = 300"), "sparsity");
        assert_eq!(field_of("rho = -1"), "rho");
        assert_eq!(field_of("snr_grid = 5,5"), "snr_grid");
        assert_eq!(field_of("snr_grid = 5,inf"), "snr_grid");
        assert_eq!(field_of("solvers = dc_gpsr,dc_gpsr"), "solvers");
        assert_eq!(field_of("solvers = none"), "solvers");
        assert_eq!(field_of("inner_max = 0"), "inner_max");
        assert_eq!(field_of("just some words"), "line 1");
    }

    #[test]
    fn unknown_solver_is_rejected() {
        assert!(ExperimentConfig::parse("solvers = lasso").is_err());
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = ExperimentConfig::from_file(Path::new("/no/such/dir/x.cfg")).unwrap_err();
        assert!(err.to_string().contains("/no/such/dir/x.cfg"), "{err}");
    }

    #[test]
    fn rho_rule_parsing() {
        assert_eq!("auto".parse::<RhoRule>().unwrap(), RhoRule::Auto);
        assert_eq!(" 0.5 ".parse::<RhoRule>().unwrap(), RhoRule::Fixed(0.5));
        assert!("0".parse::<RhoRule>().is_err());
        assert!("nan".parse::<RhoRule>().is_err());
    }
}
