//! Full-scale noiseless reconstruction: DC-GPSR against plain GPSR.
//!
//! Prints the DC objective, the ℓ1 objective and the normalized squared error
//! after every outer DC step, then the final GPSR values for comparison.
//!
//! ```text
//! cargo run --release --example noiseless_recovery [seed]
//! ```

use dcgpsr::harness::{generate_instance, ExperimentConfig};
use dcgpsr::prelude::*;

fn main() -> dcgpsr::Result<()> {
    let sample = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = ExperimentConfig::default();
    let inst = generate_instance(&cfg, sample, None)?;
    let truth = &inst.channel.x_real;
    let y = inst.measurements.y.clone();
    let problem = SparseProblem::with_default_rho(&inst.phi, y, cfg.k_real, 0.0)?;
    let opts = SolverOptions::default();
    println!(
        "N = {} (real {}), M = {}, K = {}, rho = {:.4e}",
        cfg.n_antennas,
        cfg.n_real(),
        cfg.m_measurements,
        cfg.k_real,
        problem.rho()
    );

    let dc = dc_gpsr(&problem, None, &opts, Some(truth))?;
    println!("\nDC-GPSR   outer  inner          F   l1-objective            NSE");
    for row in &dc.trace.rows {
        println!(
            "        {:>7} {:>6} {:>10.3e} {:>14.6e} {:>14.3e}",
            row.outer_iter,
            row.inner_iter_cumulative,
            row.objective_f,
            row.objective_l1,
            row.nse.unwrap_or(f64::NAN)
        );
    }

    let gpsr = gpsr_baseline(&problem, None, &opts, Some(truth))?;
    let last = gpsr.trace.rows.last().expect("GPSR records at least one row");
    let optimum = problem.rho() * truth.lp_norm(1);
    println!("\nGPSR after {} iterations: NSE {:.3e}", gpsr.inner_iters_total(), last.nse.unwrap_or(f64::NAN));
    println!(
        "l1-objective {:.6e} vs rho*||x_opt||_1 = {:.6e} (gap {:.3e})",
        last.objective_l1,
        optimum,
        last.objective_l1 - optimum
    );
    Ok(())
}
