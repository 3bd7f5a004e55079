//! The two DC inner solvers side by side: gradient projection on the split
//! QP and proximal-gradient shrinkage on the linearized ℓ1 problem. Both reach
//! the same point.
//!
//! ```text
//! cargo run --release --example dc_proximal
//! ```

use dcgpsr::prelude::*;

fn main() -> dcgpsr::Result<()> {
    let mut rng = SeededRng::new(11);
    let channel = sample_sparse_channel(32, 3, &mut rng)?;
    let phi = gaussian_matrix(32, 64, &mut rng)?;
    let y = measure(&phi, &channel.x_real)?;
    let problem = SparseProblem::with_default_rho(&phi, y, 6, 0.0)?;
    let opts = SolverOptions::default();
    let truth = &channel.x_real;

    let gp = dc_gpsr(&problem, None, &opts, Some(truth))?;
    let prox = dc_proximal(&problem, None, &opts, Some(truth))?;
    for (name, r) in [("dc_gpsr", &gp), ("dc_proximal", &prox)] {
        println!(
            "{name:>12}: {} outer / {:>5} inner iterations, NSE {:.3e}",
            r.outer_iters,
            r.inner_iters_total(),
            normalized_sq_error(truth, &r.x_hat)?
        );
    }
    println!("max |difference| = {:.3e}", (&gp.x_hat - &prox.x_hat).amax());
    Ok(())
}
