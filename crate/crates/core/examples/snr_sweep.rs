//! NMSE versus SNR for DC-GPSR and the baselines.
//!
//! Runs the full-scale sweep with a reduced sample count and prints one row
//! per SNR point.
//!
//! ```text
//! cargo run --release --example snr_sweep [samples]
//! ```

use dcgpsr::harness::{run_snr_sweep, ExperimentConfig};
use dcgpsr::solvers::SolverKind;

fn main() -> dcgpsr::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let cfg = ExperimentConfig {
        snr_grid_db: vec![5.0, 10.0, 15.0, 20.0, 25.0],
        num_samples: samples,
        solvers: vec![SolverKind::DcGpsr, SolverKind::Gpsr, SolverKind::Ista, SolverKind::Omp],
        ..ExperimentConfig::default()
    };
    let out = run_snr_sweep(&cfg)?;
    print!("SNR [dB]");
    for s in &cfg.solvers {
        print!("{:>12}", s.name());
    }
    println!();
    for &snr in &cfg.snr_grid_db {
        print!("{snr:>8}");
        for &s in &cfg.solvers {
            print!("{:>12.3e}", out.nmse(s, Some(snr)).unwrap_or(f64::NAN));
        }
        println!();
    }
    println!("({samples} samples per point)");
    Ok(())
}
