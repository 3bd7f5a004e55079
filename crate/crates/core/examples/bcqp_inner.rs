//! One inner solve: the bound-constrained QP in the split variables, with
//! Barzilai-Borwein steps and exact line search.
//!
//! ```text
//! cargo run --release --example bcqp_inner
//! ```

use dcgpsr::prelude::*;
use dcgpsr::solvers::{bcqp_gradient, solve_bcqp_gp};
use nalgebra::DVector;

fn main() -> dcgpsr::Result<()> {
    let mut rng = SeededRng::new(2);
    let channel = sample_sparse_channel(16, 2, &mut rng)?;
    let phi = gaussian_matrix(16, 32, &mut rng)?;
    let y = measure(&phi, &channel.x_real)?;
    let problem = SparseProblem::with_default_rho(&phi, y, 4, 0.0)?;

    // w = 0: the plain ℓ1 problem, as in the first DC step from the origin
    let w = vec![0.0; 64];
    let out = solve_bcqp_gp(&problem, &w, &DVector::zeros(64), &SolverOptions::default())?;
    println!("{} iterations, converged: {}", out.iterations, out.converged);
    for (i, (g, a)) in out.objectives.iter().skip(1).zip(&out.steps).enumerate().take(12) {
        println!("  step {:>2}: G = {g:>14.8e}, alpha = {a:.3e}", i + 1);
    }
    let grad = bcqp_gradient(&out.z, &problem, &w)?;
    let residual = DVector::from_fn(64, |i, _| out.z[i] - (out.z[i] - grad[i]).max(0.0));
    println!("projected-gradient residual {:.3e}", residual.norm());
    println!("min z = {:.1} (feasible)", out.z.min());
    Ok(())
}
