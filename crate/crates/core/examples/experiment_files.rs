//! A small noiseless study written to disk, then checked from the files alone:
//! every recorded error is recomputed from the persisted vectors.
//!
//! ```text
//! cargo run --release --example experiment_files [out_dir]
//! ```

use std::path::PathBuf;

use dcgpsr::harness::{read_records, run_noiseless_study, vector_paths, ExperimentConfig, OutputFormat};
use dcgpsr::io::read_real_vector;
use dcgpsr::metrics::normalized_sq_error;
use dcgpsr::solvers::SolverKind;
use nalgebra::DVector;

fn main() -> dcgpsr::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("dcgpsr_experiment"));
    let cfg = ExperimentConfig {
        n_antennas: 64,
        sparsity: 4,
        m_measurements: 48,
        k_real: 8,
        num_samples: 3,
        solvers: vec![SolverKind::DcGpsr, SolverKind::Omp],
        ..ExperimentConfig::default()
    };
    run_noiseless_study(&cfg)?.write(&dir, OutputFormat::Json)?;
    println!("wrote {}", dir.display());

    for record in read_records(&dir.join("records.csv"))? {
        let (truth_path, hat_path) = vector_paths(&dir, &record)?;
        let truth = DVector::from_vec(read_real_vector(&truth_path)?.1);
        let x_hat = DVector::from_vec(read_real_vector(&hat_path)?.1);
        let nse = normalized_sq_error(&truth, &x_hat)?;
        println!(
            "{:>8} sample {}: recorded {:.3e}, recomputed {:.3e}, identical: {}",
            record.solver_name,
            record.sample_index,
            record.nse,
            nse,
            nse == record.nse
        );
    }
    Ok(())
}
