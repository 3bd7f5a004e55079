//! ℓ1-regularized least-squares baselines.

use nalgebra::DVector;

use super::bcqp::solve_observed;
use super::{ReconResult, SolverOptions, SolverTrace, SparseProblem};
use crate::error::{Error, Result};
use crate::sparsity::shrink;

/// GPSR on `½‖y − Φx‖² + ρ‖x‖₁`: the same gradient-projection QP solver as
/// DC-GPSR with a zero subgradient and no outer loop. The trace has one row
/// per gradient-projection step.
pub fn gpsr_baseline(
    p: &SparseProblem,
    x0: Option<&DVector<f64>>,
    opts: &SolverOptions,
    truth: Option<&DVector<f64>>,
) -> Result<ReconResult> {
    let n = p.n();
    let x0 = match x0 {
        Some(x) => {
            p.check_len(x, "initial vector")?;
            x.clone()
        }
        None => DVector::zeros(n),
    };
    if let Some(t) = truth {
        p.check_len(t, "ground truth")?;
    }
    let z0 = DVector::from_fn(2 * n, |i, _| if i < n { x0[i].max(0.0) } else { (-x0[i - n]).max(0.0) });
    let zero_w = vec![0.0; 2 * n];
    let mut trace = SolverTrace::default();
    let inner = solve_observed(p, &zero_w, &z0, opts, |_, z, res_sq| {
        let x = DVector::from_fn(n, |i, _| z[i] - z[n + i]);
        trace.push(1, 1, &x, p, res_sq, truth);
    })?;
    let x_hat = DVector::from_fn(n, |i, _| inner.z[i] - inner.z[n + i]);
    if trace.is_empty() {
        let res_sq = p.residual(&x_hat).norm_squared();
        trace.push(1, 0, &x_hat, p, res_sq, truth);
    }
    let result = ReconResult {
        x_hat,
        trace,
        converged: inner.converged,
        outer_iters: 1,
    };
    result.check_finite()?;
    Ok(result)
}

/// Iterative shrinkage-thresholding, `x ← S(x − Φᵀ(Φx − y)/L, ρ/L)` with `L`
/// the power-method estimate of `‖ΦᵀΦ‖` inflated by `lipschitz_margin`.
/// Stops when the relative decrease of the ℓ1 objective reaches `inner_tol`.
pub fn ista(
    p: &SparseProblem,
    x0: Option<&DVector<f64>>,
    opts: &SolverOptions,
    truth: Option<&DVector<f64>>,
) -> Result<ReconResult> {
    opts.validate()?;
    let mut x = match x0 {
        Some(x) => {
            p.check_len(x, "initial vector")?;
            x.clone()
        }
        None => DVector::zeros(p.n()),
    };
    if let Some(t) = truth {
        p.check_len(t, "ground truth")?;
    }
    let lipschitz = (p.gram_norm() * opts.lipschitz_margin).max(f64::MIN_POSITIVE);
    let threshold = p.rho() / lipschitz;
    let mut r = p.residual(&x);
    let mut value = 0.5 * r.norm_squared() + p.rho() * x.lp_norm(1);
    let mut trace = SolverTrace::default();
    let mut converged = false;

    for iter in 1..=opts.inner_max {
        let grad = p.phi().apply_transpose(&r);
        let next = DVector::from_fn(x.len(), |i, _| shrink(x[i] - grad[i] / lipschitz, threshold));
        r = p.residual(&next);
        let res_sq = r.norm_squared();
        let next_value = 0.5 * res_sq + p.rho() * next.lp_norm(1);
        if !next_value.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: iter,
                message: "ISTA iterate became non-finite".into(),
            });
        }
        let unchanged = next == x;
        let decrease = value - next_value;
        x = next;
        value = next_value;
        trace.push(1, 1, &x, p, res_sq, truth);
        if unchanged || decrease <= opts.inner_tol * value.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let result = ReconResult {
        x_hat: x,
        trace,
        converged,
        outer_iters: 1,
    };
    result.check_finite()?;
    Ok(result)
}
