//! Command-line front end: `generate`, `solve`, `bench` and `oracle`.
//!
//! Exit status is 0 on success, 1 for usage and validation errors and 2 when
//! a solver fails numerically.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, RhoRule};
use super::experiment::{generate_instance, run_experiment, OutputFormat};
use super::oracle::{run_oracle_study, OracleConfig, OracleReport};
use crate::error::{Error, Result};
use crate::io;
use crate::metrics::normalized_sq_error;
use crate::sensing::MeasurementMatrix;
use crate::solvers::{objective_f, objective_l1, SolverKind, SolverOptions, SparseProblem};

#[derive(Debug, Parser)]
#[command(name = "dcgpsr", version, about = "Sparse angular-channel reconstruction by DC gradient projection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Base seed, overriding the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output format of machine-readable results.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one generated instance (channel, Φ, y) to a directory.
    Generate {
        /// Experiment config supplying the sizes; full scale when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Sample index within the experiment.
        #[arg(long, default_value_t = 0)]
        sample: usize,
        /// Add noise at this SNR in dB.
        #[arg(long)]
        snr: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruct one instance read from files and print its metrics.
    Solve {
        /// Directory written by `generate`; individual paths override its files.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long)]
        y: Option<PathBuf>,
        /// Ground-truth vector for error reporting.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        /// `auto` or a positive number.
        #[arg(long)]
        rho: Option<String>,
        /// Noise standard deviation used by `rho = auto`.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value = "dc_gpsr")]
        solver: String,
        /// Solver options are read from this config when given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write `x_hat.csv`, `summary.json` and `trace.csv` here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment config end to end and persist records, summary and traces.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of samples, overriding the config file.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare DC-GPSR supports with the exhaustive ℓ0 oracle on tiny instances.
    Oracle {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

/// Metadata written by `generate` next to the instance files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub sample: usize,
    pub seed: u64,
    pub n_antennas: usize,
    pub sparsity: usize,
    pub m: usize,
    pub k: usize,
    pub snr_db: Option<f64>,
    pub sigma: f64,
}

/// Metrics printed by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SolveReport {
    solver: String,
    rho: f64,
    k: usize,
    converged: bool,
    outer_iters: usize,
    inner_iters: usize,
    objective_f: f64,
    objective_l1: f64,
    nse: Option<f64>,
}

fn out_line(line: &str) {
    let mut stdout = std::io::stdout().lock();
    // a closed pipe is not worth failing over
    let _ = writeln!(stdout, "{line}");
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_file(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn generate(config: Option<&Path>, out: &Path, sample: usize, snr: Option<f64>, common: &Common) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(seed) = common.seed {
        cfg.base_seed = seed;
    }
    // a requested SNR becomes a one-point grid, so the instance matches sample
    // `sample` of a sweep whose first SNR point it is
    cfg.snr_grid_db = snr.into_iter().collect();
    cfg.validate()?;
    let inst = generate_instance(&cfg, sample, snr.map(|_| 0))?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    inst.channel.write_dir(out)?;
    inst.phi.write(out, "phi")?;
    io::write_real_vector(&out.join("y.csv"), "y", inst.measurements.y.as_slice())?;
    let meta = InstanceMeta {
        sample,
        seed: inst.seed,
        n_antennas: cfg.n_antennas,
        sparsity: cfg.sparsity,
        m: cfg.m_measurements,
        k: cfg.k_real,
        snr_db: inst.snr_db,
        sigma: inst.measurements.sigma,
    };
    io::write_json(&out.join("instance.json"), &meta)?;
    out_line(&format!(
        "wrote instance (seed {}, N = {}, M = {}, sigma = {}) to {}",
        inst.seed,
        cfg.n_antennas,
        cfg.m_measurements,
        inst.measurements.sigma,
        out.display()
    ));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(
    dir: Option<&Path>,
    phi: Option<&Path>,
    y: Option<&Path>,
    truth: Option<&Path>,
    k: Option<usize>,
    rho: Option<&str>,
    sigma: Option<f64>,
    solver: &str,
    config: Option<&Path>,
    out: Option<&Path>,
    common: &Common,
) -> Result<()> {
    let in_dir = |name: &str| dir.map(|d| d.join(name));
    let meta: Option<InstanceMeta> = match in_dir("instance.json") {
        Some(p) if p.exists() => Some(io::read_json(&p)?),
        _ => None,
    };
    let phi_path = phi
        .map(Path::to_path_buf)
        .or_else(|| in_dir("phi.csv"))
        .ok_or_else(|| Error::input("solve needs --phi or --dir"))?;
    let y_path = y
        .map(Path::to_path_buf)
        .or_else(|| in_dir("y.csv"))
        .ok_or_else(|| Error::input("solve needs --y or --dir"))?;
    let truth_path = truth
        .map(Path::to_path_buf)
        .or_else(|| in_dir("x_real.csv").filter(|p| p.exists()));
    let k = k
        .or(meta.as_ref().map(|m| m.k))
        .ok_or_else(|| Error::input("solve needs --k (or a --dir with instance.json)"))?;
    let sigma = sigma.or(meta.as_ref().map(|m| m.sigma)).unwrap_or(0.0);
    let kind: SolverKind = solver.parse()?;
    let options = match config {
        Some(p) => ExperimentConfig::from_file(p)?.solver_options,
        None => SolverOptions::default(),
    };

    let matrix = MeasurementMatrix::read(&phi_path)?;
    let (_, y_values) = io::read_real_vector(&y_path)?;
    let y = DVector::from_vec(y_values);
    if y.len() != matrix.m() {
        return Err(Error::dim(format!(
            "y has length {} but Φ is {}x{} (expected y of length {})",
            y.len(),
            matrix.m(),
            matrix.n(),
            matrix.m()
        )));
    }
    let x_true = match truth_path {
        Some(p) => {
            let (_, v) = io::read_real_vector(&p)?;
            if v.len() != matrix.n() {
                return Err(Error::dim(format!(
                    "truth has length {} but Φ has {} columns",
                    v.len(),
                    matrix.n()
                )));
            }
            Some(DVector::from_vec(v))
        }
        None => None,
    };
    let rule: RhoRule = rho.unwrap_or("auto").parse()?;
    let rho = rule.resolve(&matrix, &y, sigma)?;
    let problem = SparseProblem::new(&matrix, y, k, rho)?;
    let result = kind.run(&problem, &options, x_true.as_ref())?;
    let report = SolveReport {
        solver: kind.name().to_string(),
        rho,
        k,
        converged: result.converged,
        outer_iters: result.outer_iters,
        inner_iters: result.inner_iters_total(),
        objective_f: objective_f(&result.x_hat, &problem)?,
        objective_l1: objective_l1(&result.x_hat, &problem)?,
        nse: x_true.as_ref().map(|t| normalized_sq_error(t, &result.x_hat)).transpose()?,
    };
    if let Some(out) = out {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        result.write_dir(out)?;
        result.trace.write_csv(&out.join("trace.csv"))?;
    }
    match common.format {
        OutputFormat::Json => out_line(&serde_json::to_string_pretty(&report)?),
        OutputFormat::Csv => {
            out_line(&format!("solver: {}", report.solver));
            out_line(&format!("rho: {}", report.rho));
            out_line(&format!("k: {}", report.k));
            out_line(&format!("converged: {}", report.converged));
            out_line(&format!("outer_iters: {}", report.outer_iters));
            out_line(&format!("inner_iters: {}", report.inner_iters));
            out_line(&format!("objective_f: {:e}", report.objective_f));
            out_line(&format!("objective_l1: {:e}", report.objective_l1));
            if let Some(nse) = report.nse {
                out_line(&format!("nse: {nse:e}"));
            }
        }
    }
    Ok(())
}

fn bench(config: &Path, out: &Path, samples: Option<usize>, common: &Common) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(config)?;
    if let Some(seed) = common.seed {
        cfg.base_seed = seed;
    }
    if let Some(n) = samples {
        cfg.num_samples = n;
    }
    cfg.validate()?;
    let output = run_experiment(&cfg)?;
    output.write(out, common.format)?;
    out_line("solver,snr_db,nmse");
    for row in &output.summary {
        let snr = row.snr_db.map_or(String::new(), |s| s.to_string());
        out_line(&format!("{},{snr},{:e}", row.solver, row.nmse));
    }
    out_line(&format!("wrote {} records to {}", output.runs.len(), out.display()));
    Ok(())
}

fn write_oracle(report: &OracleReport, out: &Path, format: OutputFormat) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let join = |s: &[usize]| s.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";");
    let path = out.join("oracle.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["index", "seed", "true_support", "oracle_support", "dc_support", "agree"])?;
    for c in &report.cases {
        w.write_record([
            c.index.to_string(),
            c.seed.to_string(),
            join(&c.true_support),
            join(&c.oracle_support),
            join(&c.dc_support),
            c.agree.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    if format == OutputFormat::Json {
        io::write_json(&out.join("oracle.json"), report)?;
    }
    Ok(())
}

fn oracle(cfg: OracleConfig, out: Option<&Path>, common: &Common) -> Result<()> {
    let report = run_oracle_study(&cfg)?;
    if let Some(out) = out {
        write_oracle(&report, out, common.format)?;
    }
    out_line(&format!(
        "support agreement with the l0 oracle: {}/{} (n = {}, m = {}, k = {})",
        report.agreements,
        report.cases.len(),
        cfg.n,
        cfg.m,
        cfg.k
    ));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            config,
            out,
            sample,
            snr,
            common,
        } => generate(config.as_deref(), &out, sample, snr, &common),
        Command::Solve {
            dir,
            phi,
            y,
            truth,
            k,
            rho,
            sigma,
            solver,
            config,
            out,
            common,
        } => solve(
            dir.as_deref(),
            phi.as_deref(),
            y.as_deref(),
            truth.as_deref(),
            k,
            rho.as_deref(),
            sigma,
            &solver,
            config.as_deref(),
            out.as_deref(),
            &common,
        ),
        Command::Bench {
            config,
            out,
            samples,
            common,
        } => bench(&config, &out, samples, &common),
        Command::Oracle {
            n,
            m,
            k,
            instances,
            out,
            common,
        } => {
            let cfg = OracleConfig {
                n,
                m,
                k,
                instances,
                seed: common.seed.unwrap_or(OracleConfig::default().seed),
                solver_options: SolverOptions::default(),
            };
            oracle(cfg, out.as_deref(), &common)
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flags_and_commands_exit_with_one() {
        assert_eq!(cli_main(["dcgpsr", "bench", "--bogus"]), 1);
        assert_eq!(cli_main(["dcgpsr", "frobnicate"]), 1);
        assert_eq!(cli_main(["dcgpsr"]), 1);
    }

    #[test]
    fn help_exits_with_zero() {
        assert_eq!(cli_main(["dcgpsr", "--help"]), 0);
    }

    #[test]
    fn missing_config_exits_with_one() {
        assert_eq!(cli_main(["dcgpsr", "bench", "--config", "/no/such.cfg", "--out", "/tmp/x"]), 1);
    }
}
