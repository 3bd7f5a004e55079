//! Difference-of-convex solvers for `½‖y − Φx‖² + ρ(‖x‖₁ − ‖x‖_{K,1})`.
//!
//! Each outer step linearizes `ρ‖x‖_{K,1}` at the current iterate through a
//! top-(K,1) subgradient and solves the resulting convex ℓ1 subproblem, either
//! as a bound-constrained QP by gradient projection ([`dc_gpsr`]) or by
//! proximal-gradient shrinkage ([`dc_proximal`]).

use nalgebra::DVector;

use super::bcqp::solve_bcqp_gp;
use super::{ReconResult, SolverOptions, SolverTrace, SparseProblem};
use crate::error::{Error, Result};
use crate::sparsity::{shrink, top_k1_subgradient, SubgradientVector};

fn stacked_split(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(2 * n, |i, _| if i < n { x[i].max(0.0) } else { (-x[i - n]).max(0.0) })
}

fn merge(z: &DVector<f64>) -> DVector<f64> {
    let n = z.len() / 2;
    DVector::from_fn(n, |i, _| z[i] - z[n + i])
}

fn start_point(p: &SparseProblem, x0: Option<&DVector<f64>>) -> Result<DVector<f64>> {
    match x0 {
        Some(x) => {
            p.check_len(x, "initial vector")?;
            Ok(x.clone())
        }
        None => Ok(DVector::zeros(p.n())),
    }
}

fn check_truth(p: &SparseProblem, truth: Option<&DVector<f64>>) -> Result<()> {
    match truth {
        Some(t) => p.check_len(t, "ground truth"),
        None => Ok(()),
    }
}

/// The subgradient `w_x ∈ ∂‖x‖_{K,1}` used for the next linearization.
///
/// Nonzero entries among the `k` largest magnitudes get their sign. When `x`
/// has fewer than `k` nonzeros the remaining slots are free in the
/// subdifferential; they go to the zero entries with the largest residual
/// correlation `|Φᵀ(y − Φx)|`, signed by that correlation, so an entry the
/// previous ℓ1 step shrank to zero is not penalized in its descent direction
/// for good. At `x = 0` no slot is filled and the step is a plain ℓ1 solve.
fn dc_subgradient(p: &SparseProblem, x: &DVector<f64>) -> Result<Vec<f64>> {
    let mut w = top_k1_subgradient(x.as_slice(), p.k())?.w;
    let nnz = x.iter().filter(|v| **v != 0.0).count();
    if nnz == 0 || nnz >= p.k() {
        return Ok(w);
    }
    let corr = -p.phi().apply_transpose(&p.residual(x));
    let mut free: Vec<usize> = (0..x.len()).filter(|&i| x[i] == 0.0 && corr[i] != 0.0).collect();
    free.sort_by(|&a, &b| corr[b].abs().total_cmp(&corr[a].abs()).then(a.cmp(&b)));
    for i in free.into_iter().take(p.k() - nnz) {
        w[i] = corr[i].signum();
    }
    Ok(w)
}

/// DC gradient projection for sparse reconstruction.
///
/// At outer step `t` the subgradient `w_x ∈ ∂‖x^{t−1}‖_{K,1}` (signs of the `K`
/// largest entries, free slots filled by residual correlation) is split into
/// `w_z = [(w_x)₊; (−w_x)₊]` and the QP `min_{z≥0} ½zᵀBz + cᵀz` is solved by
/// [`solve_bcqp_gp`], warm-started from `z^{t−1}`. After every inner solve the
/// iterate is put back in complementary form `z = [(u−v)₊; (v−u)₊]`, which
/// leaves `x = u − v` unchanged and keeps `F(x^t)` non-increasing. Stops when
/// `‖z^t − z^{t−1}‖₂ ≤ outer_tol`, or when the subgradient repeats after a
/// converged inner solve: the next subproblem would then be the one just solved.
pub fn dc_gpsr(
    p: &SparseProblem,
    x0: Option<&DVector<f64>>,
    opts: &SolverOptions,
    truth: Option<&DVector<f64>>,
) -> Result<ReconResult> {
    opts.validate()?;
    check_truth(p, truth)?;
    let mut z = stacked_split(&start_point(p, x0)?);
    let mut trace = SolverTrace::default();
    let mut converged = false;
    let mut outer_iters = 0;
    let mut solved: Option<Vec<f64>> = None;

    for t in 1..=opts.outer_max {
        let x = merge(&z);
        let w_z = SubgradientVector { w: dc_subgradient(p, &x)?, k: p.k() }.split_stacked();
        if solved.as_ref() == Some(&w_z) {
            converged = true;
            break;
        }
        let inner = solve_bcqp_gp(p, &w_z, &z, opts)?;
        solved = inner.converged.then(|| w_z.clone());
        let x_next = merge(&inner.z);
        let z_next = stacked_split(&x_next);
        let step = (&z_next - &z).norm();
        if !step.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: t,
                message: "outer iterate became non-finite".into(),
            });
        }
        let res_sq = p.residual(&x_next).norm_squared();
        trace.push(t, inner.iterations, &x_next, p, res_sq, truth);
        z = z_next;
        outer_iters = t;
        if step <= opts.outer_tol {
            converged = true;
            break;
        }
    }

    let result = ReconResult {
        x_hat: merge(&z),
        trace,
        converged,
        outer_iters,
    };
    result.check_finite()?;
    Ok(result)
}

/// Output of [`solve_linearized_prox`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProxSolve {
    pub x: DVector<f64>,
    pub iterations: usize,
    /// Subproblem objective at the start point and after every iteration.
    pub objectives: Vec<f64>,
    pub converged: bool,
}

fn linearized_objective(p: &SparseProblem, s: &DVector<f64>, x: &DVector<f64>, res_sq: f64) -> f64 {
    0.5 * res_sq - s.dot(x) + p.rho() * x.lp_norm(1)
}

/// Proximal-gradient solve of `min ½‖y − Φx‖² − sᵀx + ρ‖x‖₁`:
/// `x ← S(x − ∇h(x)/L, ρ/L)` with `∇h(x) = Φᵀ(Φx − y) − s`.
///
/// `lipschitz` must bound the largest eigenvalue of `ΦᵀΦ`.
pub fn solve_linearized_prox(
    p: &SparseProblem,
    s: &DVector<f64>,
    x0: &DVector<f64>,
    lipschitz: f64,
    opts: &SolverOptions,
) -> Result<ProxSolve> {
    p.check_len(s, "linearization")?;
    p.check_len(x0, "start point")?;
    if !(lipschitz > 0.0) || !lipschitz.is_finite() {
        return Err(Error::input(format!("Lipschitz bound must be positive, got {lipschitz}")));
    }
    let threshold = p.rho() / lipschitz;
    let mut x = x0.clone();
    let mut r = p.residual(&x);
    let mut value = linearized_objective(p, s, &x, r.norm_squared());
    let mut objectives = vec![value];
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=opts.inner_max {
        let mut grad = p.phi().apply_transpose(&r);
        grad -= s;
        let next = DVector::from_fn(x.len(), |i, _| shrink(x[i] - grad[i] / lipschitz, threshold));
        r = p.residual(&next);
        let next_value = linearized_objective(p, s, &next, r.norm_squared());
        if !next_value.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: iter,
                message: "proximal iterate became non-finite".into(),
            });
        }
        let unchanged = next == x;
        let decrease = value - next_value;
        x = next;
        value = next_value;
        objectives.push(value);
        iterations = iter;
        if unchanged || decrease <= opts.inner_tol * value.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    Ok(ProxSolve {
        x,
        iterations,
        objectives,
        converged,
    })
}

/// DC iterations with proximal-gradient inner solves.
///
/// The linearization is `s = ρ·w_x` with the same subgradient as [`dc_gpsr`], and the step
/// uses `L = lipschitz_margin × (power-method estimate of ‖ΦᵀΦ‖)`. Stops when
/// `‖x^t − x^{t−1}‖₂ ≤ outer_tol` or when the subgradient repeats after a
/// converged inner solve.
pub fn dc_proximal(
    p: &SparseProblem,
    x0: Option<&DVector<f64>>,
    opts: &SolverOptions,
    truth: Option<&DVector<f64>>,
) -> Result<ReconResult> {
    opts.validate()?;
    check_truth(p, truth)?;
    let lipschitz = (p.gram_norm() * opts.lipschitz_margin).max(f64::MIN_POSITIVE);
    let mut x = start_point(p, x0)?;
    let mut trace = SolverTrace::default();
    let mut converged = false;
    let mut outer_iters = 0;
    let mut solved: Option<Vec<f64>> = None;

    for t in 1..=opts.outer_max {
        let w = dc_subgradient(p, &x)?;
        if solved.as_ref() == Some(&w) {
            converged = true;
            break;
        }
        let s = DVector::from_iterator(x.len(), w.iter().map(|wi| p.rho() * wi));
        let inner = solve_linearized_prox(p, &s, &x, lipschitz, opts)?;
        solved = inner.converged.then(|| w.clone());
        let step = (&inner.x - &x).norm();
        let res_sq = p.residual(&inner.x).norm_squared();
        trace.push(t, inner.iterations, &inner.x, p, res_sq, truth);
        x = inner.x;
        outer_iters = t;
        if step <= opts.outer_tol {
            converged = true;
            break;
        }
    }

    let result = ReconResult {
        x_hat: x,
        trace,
        converged,
        outer_iters,
    };
    result.check_finite()?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::MeasurementMatrix;

    #[test]
    fn subgradient_is_plain_at_the_origin_and_filled_below_k() {
        let phi = MeasurementMatrix::identity(5).unwrap();
        let y = DVector::from_vec(vec![2.0, 0.0, -0.5, 0.1, 0.0]);
        let p = SparseProblem::new(&phi, y, 3, 1.0).unwrap();
        assert_eq!(dc_subgradient(&p, &DVector::zeros(5)).unwrap(), vec![0.0; 5]);
        // one nonzero, two free slots: the largest correlations are -0.5 and 0.1
        let x = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(dc_subgradient(&p, &x).unwrap(), vec![1.0, 0.0, -1.0, 1.0, 0.0]);
        // k nonzeros: the plain top-(K,1) subgradient
        let x = DVector::from_vec(vec![1.0, 0.0, -0.2, 0.3, 0.0]);
        assert_eq!(dc_subgradient(&p, &x).unwrap(), vec![1.0, 0.0, -1.0, 1.0, 0.0]);
    }

    #[test]
    fn zero_correlation_entries_stay_unselected() {
        let phi = MeasurementMatrix::identity(4).unwrap();
        let y = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let p = SparseProblem::new(&phi, y.clone(), 3, 1.0).unwrap();
        assert_eq!(dc_subgradient(&p, &y).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
    }
}
