//! Experiment harness: result cardinality, reproducibility and persisted
//! vectors.

use dcgpsr::harness::{
    read_records, run_noiseless_study, run_snr_sweep, vector_paths, ExperimentConfig, OutputFormat,
};
use dcgpsr::io::read_real_vector;
use dcgpsr::metrics::normalized_sq_error;
use dcgpsr::solvers::SolverKind;
use nalgebra::DVector;

fn small(grid: &[f64], samples: usize, solvers: &[SolverKind]) -> ExperimentConfig {
    ExperimentConfig {
        n_antennas: 16,
        sparsity: 2,
        m_measurements: 16,
        k_real: 4,
        snr_grid_db: grid.to_vec(),
        num_samples: samples,
        base_seed: 11,
        solvers: solvers.to_vec(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn noiseless_study_has_one_record_per_solver_and_sample() {
    let out = run_noiseless_study(&small(&[], 2, &[SolverKind::DcGpsr, SolverKind::Gpsr])).unwrap();
    assert_eq!(out.runs.len(), 4);
    assert_eq!(out.cells.len(), 2);
    assert_eq!(out.summary.len(), 2);
    assert!(out.records().iter().all(|r| r.snr_db.is_none()));
}

#[test]
fn sweep_has_one_record_per_solver_snr_and_sample() {
    let grid = [5.0, 10.0, 15.0, 20.0, 25.0];
    let out = run_snr_sweep(&small(&grid, 10, &[SolverKind::DcGpsr, SolverKind::Omp])).unwrap();
    assert_eq!(out.runs.len(), 100);
    assert_eq!(out.cells.len(), 50);
    assert_eq!(out.summary.len(), 10);
    for row in &out.summary {
        let solver: SolverKind = row.solver.parse().unwrap();
        let errs: Vec<f64> = out
            .runs_of(solver)
            .filter(|r| r.record.snr_db == row.snr_db)
            .map(|r| r.record.nse)
            .collect();
        assert_eq!(errs.len(), 10);
        let mean = errs.iter().sum::<f64>() / 10.0;
        assert!((row.nmse - mean).abs() <= 1e-15 * mean.max(1e-300));
    }
}

#[test]
fn solvers_see_the_same_cells() {
    let out = run_snr_sweep(&small(&[10.0], 3, &[SolverKind::DcGpsr, SolverKind::Ista])).unwrap();
    let seeds = |k| out.runs_of(k).map(|r| r.record.seed).collect::<Vec<_>>();
    assert_eq!(seeds(SolverKind::DcGpsr), seeds(SolverKind::Ista));
}

#[test]
fn persisted_vectors_reproduce_recorded_errors() {
    let cfg = small(&[10.0, 20.0], 2, &[SolverKind::DcGpsr, SolverKind::Gpsr, SolverKind::Omp]);
    let tmp = tempfile::tempdir().unwrap();
    run_snr_sweep(&cfg).unwrap().write(tmp.path(), OutputFormat::Csv).unwrap();
    let records = read_records(&tmp.path().join("records.csv")).unwrap();
    assert_eq!(records.len(), 12);
    for record in &records {
        let (truth, estimate) = vector_paths(tmp.path(), record).unwrap();
        let x = DVector::from_vec(read_real_vector(&truth).unwrap().1);
        let x_hat = DVector::from_vec(read_real_vector(&estimate).unwrap().1);
        let nse = normalized_sq_error(&x, &x_hat).unwrap();
        assert!((nse - record.nse).abs() <= 1e-12 * record.nse.max(1e-300), "{record:?}");
    }
}

#[test]
fn reruns_agree_except_for_wall_time() {
    let cfg = small(&[15.0], 3, &[SolverKind::DcGpsr, SolverKind::DcProximal]);
    let strip = |out: dcgpsr::harness::ExperimentOutput| {
        out.records()
            .into_iter()
            .map(|mut r| {
                r.wall_time_seconds = 0.0;
                r
            })
            .collect::<Vec<_>>()
    };
    let a = run_snr_sweep(&cfg).unwrap();
    let b = run_snr_sweep(&cfg).unwrap();
    for (ra, rb) in a.runs.iter().zip(&b.runs) {
        assert_eq!(ra.x_hat, rb.x_hat);
        assert_eq!(ra.trace, rb.trace);
    }
    assert_eq!(strip(a), strip(b));
}

#[test]
fn changing_the_seed_changes_the_instances() {
    let cfg = small(&[], 1, &[SolverKind::Omp]);
    let other = ExperimentConfig { base_seed: 12, ..cfg.clone() };
    let a = run_noiseless_study(&cfg).unwrap();
    let b = run_noiseless_study(&other).unwrap();
    assert_ne!(a.cells[0].x_true, b.cells[0].x_true);
}

#[test]
fn studies_reject_the_wrong_grid() {
    assert!(run_noiseless_study(&small(&[10.0], 1, &[SolverKind::Omp])).is_err());
    assert!(run_snr_sweep(&small(&[], 1, &[SolverKind::Omp])).is_err());
}
