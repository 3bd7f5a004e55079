//! Convex and greedy baselines on one noisy instance: GPSR and ISTA solve the
//! same ℓ1-penalized problem, OMP fits K columns greedily.
//!
//! ```text
//! cargo run --release --example baselines
//! ```

use dcgpsr::harness::{generate_instance, ExperimentConfig};
use dcgpsr::prelude::*;
use dcgpsr::solvers::objective_l1;

fn main() -> dcgpsr::Result<()> {
    let cfg = ExperimentConfig {
        n_antennas: 64,
        sparsity: 4,
        m_measurements: 48,
        k_real: 8,
        snr_grid_db: vec![20.0],
        ..ExperimentConfig::default()
    };
    let inst = generate_instance(&cfg, 0, Some(0))?;
    let truth = &inst.channel.x_real;
    let sys = &inst.measurements;
    let problem = SparseProblem::with_default_rho(&inst.phi, sys.y.clone(), cfg.k_real, sys.sigma)?;
    let opts = SolverOptions { inner_max: 20_000, ..SolverOptions::default() };

    println!("SNR 20 dB, sigma = {:.4e}, rho = {:.4e}", sys.sigma, problem.rho());
    for kind in [SolverKind::DcGpsr, SolverKind::Gpsr, SolverKind::Ista, SolverKind::Omp] {
        let r = kind.run(&problem, &opts, Some(truth))?;
        println!(
            "{:>8}: NSE {:.3e}, l1-objective {:.8e}, {} iterations",
            kind.name(),
            normalized_sq_error(truth, &r.x_hat)?,
            objective_l1(&r.x_hat, &problem)?,
            r.inner_iters_total()
        );
    }
    Ok(())
}
