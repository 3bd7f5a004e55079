//! Bound-constrained QP in the split variables `z = [u; v] ≥ 0`:
//!
//! ```text
//! G(z) = ½ (u−v)ᵀΦᵀΦ(u−v) − yᵀΦ(u−v) + ρ·(1 − w_z)ᵀz
//! ```
//!
//! The Hessian `[[A, −A], [−A, A]]` with `A = ΦᵀΦ` is never formed; every
//! product goes through `Φ` and `Φᵀ` applied to `u − v`.

use nalgebra::DVector;

use super::{SolverOptions, SparseProblem};
use crate::error::{Error, Result};

/// Inner iterations between exact recomputations of the residual.
const RESIDUAL_REFRESH: usize = 50;

fn check_split_len(p: &SparseProblem, len: usize, what: &str) -> Result<()> {
    if len != 2 * p.n() {
        return Err(Error::dim(format!(
            "{what} has length {len}, expected 2N = {}",
            2 * p.n()
        )));
    }
    Ok(())
}

fn merged(z: &DVector<f64>, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |i, _| z[i] - z[n + i])
}

/// State of one gradient evaluation.
struct Eval {
    value: f64,
    grad: DVector<f64>,
    res_sq: f64,
}

/// `G` and `∇G` at `z`, given the residual `r = Φ(u − v) − y`.
fn evaluate_with_residual(p: &SparseProblem, w_z: &[f64], z: &DVector<f64>, r: &DVector<f64>) -> Eval {
    let n = p.n();
    let rho = p.rho();
    let g = p.phi().apply_transpose(r);
    let mut linear = 0.0;
    let grad = DVector::from_fn(2 * n, |i, _| {
        let lin = rho * (1.0 - w_z[i]);
        linear += lin * z[i];
        if i < n {
            g[i] + lin
        } else {
            -g[i - n] + lin
        }
    });
    let res_sq = r.norm_squared();
    let value = 0.5 * res_sq - 0.5 * p.y().norm_squared() + linear;
    Eval { value, grad, res_sq }
}

fn evaluate(p: &SparseProblem, w_z: &[f64], z: &DVector<f64>) -> Eval {
    let r = p.residual(&merged(z, p.n()));
    evaluate_with_residual(p, w_z, z, &r)
}

/// `G(z)`.
pub fn bcqp_objective(z: &DVector<f64>, p: &SparseProblem, w_z: &[f64]) -> Result<f64> {
    check_split_len(p, z.len(), "split iterate")?;
    check_split_len(p, w_z.len(), "subgradient")?;
    Ok(evaluate(p, w_z, z).value)
}

/// `∇G(z) = [Φᵀ(Φ(u−v) − y); −Φᵀ(Φ(u−v) − y)] + ρ(1 − w_z)`.
pub fn bcqp_gradient(z: &DVector<f64>, p: &SparseProblem, w_z: &[f64]) -> Result<DVector<f64>> {
    check_split_len(p, z.len(), "split iterate")?;
    check_split_len(p, w_z.len(), "subgradient")?;
    Ok(evaluate(p, w_z, z).grad)
}

/// Output of [`solve_bcqp_gp`].
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolve {
    pub z: DVector<f64>,
    pub iterations: usize,
    /// `G` at the start point followed by `G` after every accepted step.
    pub objectives: Vec<f64>,
    /// BB step `α` used by every accepted step.
    pub steps: Vec<f64>,
    pub converged: bool,
}

/// Minimizes `G` over `z ≥ 0` by gradient projection.
///
/// Each step projects `z − α∇G(z)` onto the nonnegative orthant and moves a
/// fraction `β ∈ (0, 1]` toward it. `α` is the Barzilai-Borwein ratio
/// `δzᵀδz / δzᵀBδz` of the previous step, clamped to
/// `[alpha_min, alpha_max]`, starting from `1/‖B‖`. Since `G` is quadratic
/// along the step direction `d`, `β` is the exact minimizer
/// `−∇G(z)ᵀd / dᵀBd` clipped to 1. Stops when the decrease relative to `|G|`
/// falls to `inner_tol`, when the projected step vanishes, or after
/// `inner_max` steps.
pub fn solve_bcqp_gp(
    p: &SparseProblem,
    w_z: &[f64],
    z0: &DVector<f64>,
    opts: &SolverOptions,
) -> Result<InnerSolve> {
    solve_observed(p, w_z, z0, opts, |_, _, _| {})
}

/// [`solve_bcqp_gp`] with a callback receiving `(iteration, z, ‖Φx − y‖²)`
/// after every accepted step.
pub(crate) fn solve_observed<F>(
    p: &SparseProblem,
    w_z: &[f64],
    z0: &DVector<f64>,
    opts: &SolverOptions,
    mut observe: F,
) -> Result<InnerSolve>
where
    F: FnMut(usize, &DVector<f64>, f64),
{
    let n = p.n();
    check_split_len(p, z0.len(), "start point")?;
    check_split_len(p, w_z.len(), "subgradient")?;
    if z0.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::input("start point must be elementwise nonnegative"));
    }
    opts.validate()?;

    let lipschitz = 2.0 * p.gram_norm();
    let mut alpha = if lipschitz > 0.0 {
        (1.0 / lipschitz).clamp(opts.alpha_min, opts.alpha_max)
    } else {
        opts.alpha_max
    };

    let mut z = z0.clone();
    let mut r = p.residual(&merged(&z, n));
    let mut state = evaluate_with_residual(p, w_z, &z, &r);
    let mut objectives = vec![state.value];
    let mut steps = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut d = DVector::zeros(2 * n);

    for iter in 1..=opts.inner_max {
        for i in 0..2 * n {
            d[i] = (z[i] - alpha * state.grad[i]).max(0.0) - z[i];
        }
        if d.iter().all(|v| *v == 0.0) {
            converged = true;
            break;
        }
        let dd = d.norm_squared();
        let bd = p.phi().apply(&merged(&d, n));
        let dbd = bd.norm_squared();
        let gd = state.grad.dot(&d);
        if !(dd.is_finite() && dbd.is_finite() && gd.is_finite()) {
            return Err(Error::NumericalFailure {
                iteration: iter,
                message: "non-finite gradient projection step".into(),
            });
        }
        if gd >= 0.0 {
            // no descent left at working precision
            converged = true;
            break;
        }
        let beta = if dbd > 0.0 { (-gd / dbd).min(1.0) } else { 1.0 };
        let mut clipped = false;
        for i in 0..2 * n {
            let next = z[i] + beta * d[i];
            clipped |= next < 0.0;
            z[i] = next.max(0.0);
        }
        let decrease = -(beta * gd + 0.5 * beta * beta * dbd);

        // Φ(u − v) moves by β·Φ(d_u − d_v); recompute exactly now and then
        // and whenever rounding pushed a coordinate below zero
        if clipped || iter % RESIDUAL_REFRESH == 0 {
            r = p.residual(&merged(&z, n));
        } else {
            r.axpy(beta, &bd, 1.0);
        }
        state = evaluate_with_residual(p, w_z, &z, &r);
        if !state.value.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: iter,
                message: "objective became non-finite".into(),
            });
        }
        steps.push(alpha);
        objectives.push(state.value);
        iterations = iter;
        observe(iter, &z, state.res_sq);

        alpha = if dbd > 0.0 {
            (dd / dbd).clamp(opts.alpha_min, opts.alpha_max)
        } else {
            opts.alpha_max
        };
        if decrease <= opts.inner_tol * state.value.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    if iterations > 0 {
        // report the exact objective of the returned iterate
        state = evaluate(p, w_z, &z);
        if let Some(last) = objectives.last_mut() {
            *last = state.value;
        }
    }

    Ok(InnerSolve {
        z,
        iterations,
        objectives,
        steps,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::sensing::{gaussian_matrix, MeasurementMatrix};
    use nalgebra::DMatrix;

    fn random_instance(seed: u64, m: usize, n: usize) -> (MeasurementMatrix, DVector<f64>, Vec<f64>, DVector<f64>) {
        let mut rng = SeededRng::new(seed);
        let phi = gaussian_matrix(m, n, &mut rng).unwrap();
        let y = DVector::from_fn(m, |_, _| rng.standard_normal());
        let w: Vec<f64> = (0..2 * n).map(|_| if rng.uniform(0.0, 1.0) < 0.3 { 1.0 } else { 0.0 }).collect();
        let z = DVector::from_fn(2 * n, |_, _| rng.uniform(0.0, 2.0));
        (phi, y, w, z)
    }

    #[test]
    fn gradient_matches_central_differences() {
        for seed in 0..20 {
            let (phi, y, w, z) = random_instance(seed, 6, 10);
            let p = SparseProblem::new(&phi, y, 3, 0.7).unwrap();
            let grad = bcqp_gradient(&z, &p, &w).unwrap();
            let h = 1e-5;
            let mut fd = DVector::zeros(20);
            for i in 0..20 {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[i] += h;
                zm[i] -= h;
                fd[i] = (bcqp_objective(&zp, &p, &w).unwrap() - bcqp_objective(&zm, &p, &w).unwrap()) / (2.0 * h);
            }
            let rel = (&grad - &fd).norm() / grad.norm();
            assert!(rel <= 1e-5, "seed {seed}: {rel}");
        }
    }

    #[test]
    fn gradient_at_origin_is_rho() {
        let phi = gaussian_matrix(3, 4, &mut SeededRng::new(1)).unwrap();
        let p = SparseProblem::new(&phi, DVector::zeros(3), 2, 0.25).unwrap();
        let g = bcqp_gradient(&DVector::zeros(8), &p, &[0.0; 8]).unwrap();
        assert!(g.iter().all(|v| *v == 0.25));
    }

    #[test]
    fn gradient_halves_are_antisymmetric() {
        let (phi, y, w, z) = random_instance(9, 5, 7);
        let rho = 0.6;
        let p = SparseProblem::new(&phi, y, 2, rho).unwrap();
        let g = bcqp_gradient(&z, &p, &w).unwrap();
        for i in 0..7 {
            let expected = 2.0 * rho - rho * (w[i] + w[7 + i]);
            assert!((g[i] + g[7 + i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_checks_dimensions() {
        let (phi, y, w, _) = random_instance(2, 4, 5);
        let p = SparseProblem::new(&phi, y, 2, 1.0).unwrap();
        assert!(matches!(
            bcqp_gradient(&DVector::zeros(9), &p, &w),
            Err(Error::InvalidDimension(_))
        ));
        assert!(bcqp_gradient(&DVector::zeros(10), &p, &w[..4]).is_err());
    }

    #[test]
    fn nonnegative_linear_term_keeps_origin_optimal() {
        // y = 0 and w = 0 make c = ρ·1 ≥ 0
        let phi = gaussian_matrix(4, 6, &mut SeededRng::new(3)).unwrap();
        let p = SparseProblem::new(&phi, DVector::zeros(4), 2, 0.5).unwrap();
        let out = solve_bcqp_gp(&p, &[0.0; 12], &DVector::zeros(12), &SolverOptions::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
        assert!(out.z.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn scalar_instance_reaches_projected_stationarity() {
        // Φ = [1], y = [2], ρ = 0.1, w = [1, 0]: optimum u = 2, v = 0
        let phi = MeasurementMatrix::from_matrix(DMatrix::from_element(1, 1, 1.0)).unwrap();
        let p = SparseProblem::new(&phi, DVector::from_vec(vec![2.0]), 1, 0.1).unwrap();
        let w = [1.0, 0.0];
        let out = solve_bcqp_gp(&p, &w, &DVector::zeros(2), &SolverOptions::default()).unwrap();
        let g = bcqp_gradient(&out.z, &p, &w).unwrap();
        let residual = DVector::from_fn(2, |i, _| out.z[i] - (out.z[i] - g[i]).max(0.0));
        assert!(residual.norm() <= 1e-8, "{residual}");
        assert!((out.z[0] - 2.0).abs() < 1e-8 && out.z[1] == 0.0);
    }

    #[test]
    fn matches_slow_fixed_step_projected_gradient() {
        let (phi, y, w, _) = random_instance(21, 5, 8);
        let p = SparseProblem::new(&phi, y, 2, 0.3).unwrap();
        let opts = SolverOptions { inner_max: 100_000, ..SolverOptions::default() };
        let fast = solve_bcqp_gp(&p, &w, &DVector::zeros(16), &opts).unwrap();
        let fast_val = bcqp_objective(&fast.z, &p, &w).unwrap();

        // plain projected gradient with step 1/(2‖B‖), one million iterations
        let step = 0.5 / (2.0 * p.phi().gram_spectral_norm());
        let mut z = DVector::<f64>::zeros(16);
        for _ in 0..1_000_000 {
            let g = bcqp_gradient(&z, &p, &w).unwrap();
            z = (&z - &g * step).map(|v| v.max(0.0));
        }
        let slow_val = bcqp_objective(&z, &p, &w).unwrap();
        assert!((fast_val - slow_val).abs() <= 1e-10, "{fast_val} vs {slow_val}");
    }

    #[test]
    fn iterates_stay_feasible_and_descend() {
        for seed in 0..10 {
            let (phi, y, w, z0) = random_instance(100 + seed, 8, 12);
            let p = SparseProblem::new(&phi, y, 3, 0.2).unwrap();
            let opts = SolverOptions { alpha_min: 1e-6, alpha_max: 1e3, ..SolverOptions::default() };
            let out = solve_bcqp_gp(&p, &w, &z0, &opts).unwrap();
            assert!(out.z.iter().all(|v| *v >= 0.0));
            for pair in out.objectives.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12, "seed {seed}: {pair:?}");
            }
            assert!(out.steps.iter().all(|a| (1e-6..=1e3).contains(a)));
        }
    }

    #[test]
    fn rejects_infeasible_start() {
        let (phi, y, w, mut z) = random_instance(4, 3, 4);
        let p = SparseProblem::new(&phi, y, 2, 1.0).unwrap();
        z[0] = -1.0;
        assert!(matches!(
            solve_bcqp_gp(&p, &w, &z, &SolverOptions::default()),
            Err(Error::InvalidInput(_))
        ));
    }
}
