//! Noiseless convergence study and noisy SNR sweep.
//!
//! Every (sample, SNR) cell draws its channel, measurement matrix and noise
//! from its own generator seeded with `hash64(base_seed, sample, snr_index)`
//! (`snr_index = 0` for noiseless cells), so cells are independent and adding
//! SNR points never changes the data of existing ones.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::channel_model::{sample_sparse_channel, ChannelSample};
use crate::error::{Error, Result};
use crate::io;
use crate::metrics::{mean_error, normalized_sq_error};
use crate::rng::{hash64, SeededRng};
use crate::sensing::{gaussian_matrix, noisy_measurements, MeasurementMatrix, NoisySystem};
use crate::solvers::{SolverKind, SolverTrace, SparseProblem};

/// Output file flavour; CSV files are always written, JSON adds a mirror.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Generated data of one (sample, SNR) cell.
#[derive(Debug, Clone)]
pub struct Instance {
    pub sample_index: usize,
    pub snr_db: Option<f64>,
    pub seed: u64,
    pub channel: ChannelSample,
    pub phi: MeasurementMatrix,
    pub measurements: NoisySystem,
}

/// Seed of sample `sample_index` at SNR grid position `snr_index`.
pub fn cell_seed(base_seed: u64, sample_index: usize, snr_index: usize) -> u64 {
    hash64(base_seed, sample_index as u64, snr_index as u64)
}

/// Draws channel, then `Φ`, then noise for one cell. `snr_index` is `None`
/// for noiseless data.
pub fn generate_instance(cfg: &ExperimentConfig, sample_index: usize, snr_index: Option<usize>) -> Result<Instance> {
    let snr_db = match snr_index {
        Some(s) => Some(*cfg.snr_grid_db.get(s).ok_or_else(|| {
            Error::config("snr_grid", format!("SNR index {s} is outside the grid of {}", cfg.snr_grid_db.len()))
        })?),
        None => None,
    };
    let seed = cell_seed(cfg.base_seed, sample_index, snr_index.unwrap_or(0));
    let mut rng = SeededRng::new(seed);
    let channel = sample_sparse_channel(cfg.n_antennas, cfg.sparsity, &mut rng)?;
    let phi = gaussian_matrix(cfg.m_measurements, cfg.n_real(), &mut rng)?;
    let measurements = noisy_measurements(&phi, &channel.x_real, snr_db, &mut rng)?;
    Ok(Instance {
        sample_index,
        snr_db,
        seed,
        channel,
        phi,
        measurements,
    })
}

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    #[serde(rename = "solver")]
    pub solver_name: String,
    #[serde(rename = "sample")]
    pub sample_index: usize,
    pub seed: u64,
    pub snr_db: Option<f64>,
    pub nse: f64,
    pub outer_iters: usize,
    #[serde(rename = "inner_iters")]
    pub inner_iters_total: usize,
    #[serde(rename = "wall_s")]
    pub wall_time_seconds: f64,
}

/// One row of `summary.csv`: mean normalized squared error per solver and SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub solver: String,
    pub snr_db: Option<f64>,
    pub nmse: f64,
}

/// A solver's full output on one cell.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub solver: SolverKind,
    pub record: ResultRecord,
    pub rho: f64,
    pub converged: bool,
    pub x_hat: DVector<f64>,
    pub trace: SolverTrace,
}

/// Ground truth of one cell.
#[derive(Debug, Clone)]
pub struct CellTruth {
    pub sample_index: usize,
    pub snr_db: Option<f64>,
    pub seed: u64,
    pub sigma: f64,
    pub x_true: DVector<f64>,
}

/// Everything an experiment produced, in `(solver, snr, sample)` order.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub cells: Vec<CellTruth>,
    pub runs: Vec<SolverRun>,
    pub summary: Vec<SummaryRow>,
}

fn snr_tag(snr_db: Option<f64>) -> String {
    snr_db.map_or(String::new(), |s| format!("snr{s}_"))
}

/// File stem of a cell, e.g. `snr25_s0007`.
pub fn cell_id(sample_index: usize, snr_db: Option<f64>) -> String {
    format!("{}s{sample_index:04}", snr_tag(snr_db))
}

/// File stem of a run, e.g. `dc_gpsr_snr25_s0007`.
pub fn run_id(solver: SolverKind, sample_index: usize, snr_db: Option<f64>) -> String {
    format!("{solver}_{}", cell_id(sample_index, snr_db))
}

/// Runs every configured solver on one generated instance.
pub fn solve_instance(cfg: &ExperimentConfig, inst: &Instance) -> Result<Vec<SolverRun>> {
    let y = &inst.measurements.y;
    let rho = cfg.rho.resolve(&inst.phi, y, inst.measurements.sigma)?;
    let problem = SparseProblem::new(&inst.phi, y.clone(), cfg.k_real, rho)?;
    let truth = &inst.channel.x_real;
    cfg.solvers
        .iter()
        .map(|&solver| {
            let start = Instant::now();
            let result = solver.run(&problem, &cfg.solver_options, Some(truth))?;
            let wall = start.elapsed().as_secs_f64();
            let record = ResultRecord {
                solver_name: solver.name().to_string(),
                sample_index: inst.sample_index,
                seed: inst.seed,
                snr_db: inst.snr_db,
                nse: normalized_sq_error(truth, &result.x_hat)?,
                outer_iters: result.outer_iters,
                inner_iters_total: result.inner_iters_total(),
                wall_time_seconds: wall,
            };
            Ok(SolverRun {
                solver,
                record,
                rho,
                converged: result.converged,
                x_hat: result.x_hat,
                trace: result.trace,
            })
        })
        .collect()
}

fn run_cells(cfg: &ExperimentConfig, snr_indices: &[Option<usize>]) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut cells = Vec::new();
    let mut runs = Vec::new();
    for &snr_index in snr_indices {
        for sample in 0..cfg.num_samples {
            let inst = generate_instance(cfg, sample, snr_index)?;
            runs.extend(solve_instance(cfg, &inst)?);
            cells.push(CellTruth {
                sample_index: sample,
                snr_db: inst.snr_db,
                seed: inst.seed,
                sigma: inst.measurements.sigma,
                x_true: inst.channel.x_real,
            });
        }
    }
    // (solver, snr, sample): solver in config order, SNR in grid order
    let solver_pos = |s: SolverKind| cfg.solvers.iter().position(|&c| c == s);
    let snr_pos = |r: &SolverRun| r.record.snr_db.and_then(|v| cfg.snr_grid_db.iter().position(|&g| g == v));
    runs.sort_by_key(|r| (solver_pos(r.solver), snr_pos(r), r.record.sample_index));
    let summary = summarize(cfg, &runs)?;
    Ok(ExperimentOutput {
        config: cfg.clone(),
        cells,
        runs,
        summary,
    })
}

fn summarize(cfg: &ExperimentConfig, runs: &[SolverRun]) -> Result<Vec<SummaryRow>> {
    let grid: Vec<Option<f64>> = if cfg.snr_grid_db.is_empty() {
        vec![None]
    } else {
        cfg.snr_grid_db.iter().map(|&s| Some(s)).collect()
    };
    let mut rows = Vec::new();
    for &solver in &cfg.solvers {
        for &snr in &grid {
            let errors: Vec<f64> = runs
                .iter()
                .filter(|r| r.solver == solver && r.record.snr_db == snr)
                .map(|r| r.record.nse)
                .collect();
            rows.push(SummaryRow {
                solver: solver.name().to_string(),
                snr_db: snr,
                nmse: mean_error(&errors)?,
            });
        }
    }
    Ok(rows)
}

/// Noiseless study: every solver on `num_samples` noiseless instances.
pub fn run_noiseless_study(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if !cfg.snr_grid_db.is_empty() {
        return Err(Error::config("snr_grid", "a noiseless study needs an empty SNR grid"));
    }
    run_cells(cfg, &[None])
}

/// Noisy sweep: every solver on `num_samples` instances per SNR point.
pub fn run_snr_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if cfg.snr_grid_db.is_empty() {
        return Err(Error::config("snr_grid", "an SNR sweep needs at least one SNR point"));
    }
    let indices: Vec<Option<usize>> = (0..cfg.snr_grid_db.len()).map(Some).collect();
    run_cells(cfg, &indices)
}

/// [`run_snr_sweep`] when the config has an SNR grid, else [`run_noiseless_study`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if cfg.snr_grid_db.is_empty() {
        run_noiseless_study(cfg)
    } else {
        run_snr_sweep(cfg)
    }
}

fn write_csv_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Header of `records.csv`.
pub const RECORD_COLUMNS: [&str; 8] = [
    "solver",
    "sample",
    "seed",
    "snr_db",
    "nse",
    "outer_iters",
    "inner_iters",
    "wall_s",
];

impl ExperimentOutput {
    pub fn records(&self) -> Vec<ResultRecord> {
        self.runs.iter().map(|r| r.record.clone()).collect()
    }

    pub fn runs_of(&self, solver: SolverKind) -> impl Iterator<Item = &SolverRun> {
        self.runs.iter().filter(move |r| r.solver == solver)
    }

    /// Mean error of `solver` at `snr_db` (`None` for noiseless).
    pub fn nmse(&self, solver: SolverKind, snr_db: Option<f64>) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.solver == solver.name() && r.snr_db == snr_db)
            .map(|r| r.nmse)
    }

    /// Writes into `dir`:
    /// - `config.cfg`, `records.csv`, `summary.csv`;
    /// - `traces/<run>.csv` when traces are enabled;
    /// - `vectors/<cell>_x_true.csv` and `vectors/<run>_x_hat.csv` when vectors are enabled;
    /// - `records.json` and `summary.json` for [`OutputFormat::Json`].
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let cfg_path = dir.join("config.cfg");
        std::fs::write(&cfg_path, self.config.to_config_string()).map_err(|e| Error::io(&cfg_path, e))?;
        let records = self.records();
        write_csv_rows(&dir.join("records.csv"), &RECORD_COLUMNS, &records)?;
        write_csv_rows(&dir.join("summary.csv"), &["solver", "snr_db", "nmse"], &self.summary)?;
        if format == OutputFormat::Json {
            io::write_json(&dir.join("records.json"), &records)?;
            io::write_json(&dir.join("summary.json"), &self.summary)?;
        }
        if self.config.save_traces {
            let traces = dir.join("traces");
            for run in &self.runs {
                let id = run_id(run.solver, run.record.sample_index, run.record.snr_db);
                run.trace.write_csv(&traces.join(format!("{id}.csv")))?;
            }
        }
        if self.config.save_vectors {
            let vectors = dir.join("vectors");
            std::fs::create_dir_all(&vectors).map_err(|e| Error::io(&vectors, e))?;
            for cell in &self.cells {
                let path = vectors.join(format!("{}_x_true.csv", cell_id(cell.sample_index, cell.snr_db)));
                io::write_real_vector(&path, "x_true", cell.x_true.as_slice())?;
            }
            for run in &self.runs {
                let id = run_id(run.solver, run.record.sample_index, run.record.snr_db);
                io::write_real_vector(&vectors.join(format!("{id}_x_hat.csv")), "x_hat", run.x_hat.as_slice())?;
            }
        }
        Ok(())
    }
}

/// Reads `records.csv` back.
pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    })?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Paths of the persisted truth and estimate behind one record.
pub fn vector_paths(dir: &Path, record: &ResultRecord) -> Result<(PathBuf, PathBuf)> {
    let solver: SolverKind = record.solver_name.parse()?;
    let vectors = dir.join("vectors");
    Ok((
        vectors.join(format!("{}_x_true.csv", cell_id(record.sample_index, record.snr_db))),
        vectors.join(format!(
            "{}_x_hat.csv",
            run_id(solver, record.sample_index, record.snr_db)
        )),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::RhoRule;

    fn tiny(solvers: Vec<SolverKind>, snr: Vec<f64>, samples: usize) -> ExperimentConfig {
        ExperimentConfig {
            n_antennas: 16,
            sparsity: 2,
            m_measurements: 16,
            k_real: 4,
            rho: RhoRule::Auto,
            snr_grid_db: snr,
            num_samples: samples,
            base_seed: 5,
            solvers,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn instance_is_reproducible_and_cells_differ() {
        let cfg = tiny(vec![SolverKind::DcGpsr], vec![10.0, 20.0], 2);
        let a = generate_instance(&cfg, 1, Some(0)).unwrap();
        let b = generate_instance(&cfg, 1, Some(0)).unwrap();
        assert_eq!(a.measurements, b.measurements);
        assert_eq!(a.phi, b.phi);
        let c = generate_instance(&cfg, 1, Some(1)).unwrap();
        assert_ne!(a.channel.x_real, c.channel.x_real);
        assert!(generate_instance(&cfg, 0, Some(2)).is_err());
    }

    #[test]
    fn noiseless_cell_equals_zero_sigma() {
        let cfg = tiny(vec![SolverKind::DcGpsr], vec![], 1);
        let inst = generate_instance(&cfg, 0, None).unwrap();
        assert_eq!(inst.measurements.sigma, 0.0);
        assert_eq!(inst.seed, cell_seed(5, 0, 0));
    }

    #[test]
    fn study_and_sweep_reject_the_wrong_grid() {
        let quiet = tiny(vec![SolverKind::Omp], vec![], 1);
        let noisy = tiny(vec![SolverKind::Omp], vec![20.0], 1);
        assert!(matches!(run_snr_sweep(&quiet), Err(Error::Config { .. })));
        assert!(matches!(run_noiseless_study(&noisy), Err(Error::Config { .. })));
    }

    #[test]
    fn ids_are_stable() {
        assert_eq!(cell_id(7, None), "s0007");
        assert_eq!(cell_id(7, Some(25.0)), "snr25_s0007");
        assert_eq!(run_id(SolverKind::Gpsr, 3, Some(2.5)), "gpsr_snr2.5_s0003");
    }
}
