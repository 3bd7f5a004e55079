//! Greedy and exhaustive support-selection methods.

use nalgebra::{DMatrix, DVector};

use super::{ReconResult, SolverTrace, SparseProblem};
use crate::error::{Error, Result};
use crate::metrics::normalized_sq_error;
use crate::sensing::MeasurementMatrix;

/// Upper bound on the number of supports [`brute_force_l0`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

const RANK_TOL: f64 = 1e-10;

/// Least-squares coefficients of `y` on the columns in `support`, via a thin
/// Householder QR. Returns `None` when the selected columns are numerically
/// rank deficient.
pub fn least_squares_on_support(
    phi: &MeasurementMatrix,
    support: &[usize],
    y: &DVector<f64>,
) -> Option<DVector<f64>> {
    if support.is_empty() {
        return Some(DVector::zeros(0));
    }
    if support.len() > phi.m() {
        return None;
    }
    let sub = DMatrix::from_fn(phi.m(), support.len(), |i, j| phi.matrix()[(i, support[j])]);
    let scale = sub.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let qr = sub.qr();
    let r = qr.r();
    if scale == 0.0 || r.diagonal().iter().any(|d| d.abs() <= RANK_TOL * scale) {
        return None;
    }
    let qty = qr.q().tr_mul(y);
    r.solve_upper_triangular(&qty)
}

fn scatter(n: usize, support: &[usize], coef: &DVector<f64>) -> DVector<f64> {
    let mut x = DVector::zeros(n);
    for (&i, &c) in support.iter().zip(coef.iter()) {
        x[i] = c;
    }
    x
}

/// Orthogonal matching pursuit with `k` rounds of: pick the column with the
/// largest normalized correlation `|⟨r, φⱼ⟩|/‖φⱼ‖`, refit by least squares on
/// the support, update the residual. Stops early once the residual vanishes.
pub fn omp(
    y: &DVector<f64>,
    phi: &MeasurementMatrix,
    k: usize,
    truth: Option<&DVector<f64>>,
) -> Result<ReconResult> {
    let (m, n) = (phi.m(), phi.n());
    if y.len() != m {
        return Err(Error::dim(format!(
            "measurements have length {} but the matrix has {m} rows",
            y.len()
        )));
    }
    if k == 0 || k > m.min(n) {
        return Err(Error::input(format!("OMP sparsity k = {k} must lie in 1..={}", m.min(n))));
    }
    // only used for trace bookkeeping; ρ does not enter OMP
    let problem = SparseProblem::new(phi, y.clone(), k, 1.0)?;
    let col_norms: Vec<f64> = phi.matrix().column_iter().map(|c| c.norm()).collect();
    let y_norm = y.norm();
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut selected = vec![false; n];
    let mut x = DVector::zeros(n);
    let mut residual = y.clone();
    let mut trace = SolverTrace::default();

    for round in 1..=k {
        if residual.norm() <= 1e-13 * y_norm || y_norm == 0.0 {
            break;
        }
        let corr = phi.apply_transpose(&residual);
        let best = (0..n)
            .filter(|&j| !selected[j] && col_norms[j] > 0.0)
            .map(|j| (j, corr[j].abs() / col_norms[j]))
            .fold(None, |acc: Option<(usize, f64)>, cand| match acc {
                Some(a) if a.1 >= cand.1 => Some(a),
                _ => Some(cand),
            });
        let Some((j, _)) = best else { break };
        selected[j] = true;
        support.push(j);
        let coef = least_squares_on_support(phi, &support, y).ok_or_else(|| Error::NumericalFailure {
            iteration: round,
            message: format!("selected columns {support:?} are rank deficient"),
        })?;
        x = scatter(n, &support, &coef);
        residual = y - phi.apply(&x);
        trace.push(round, 1, &x, &problem, residual.norm_squared(), truth);
    }

    if trace.is_empty() {
        trace.push(1, 0, &x, &problem, residual.norm_squared(), truth);
    }
    if let (Some(t), Some(row)) = (truth, trace.rows.last_mut()) {
        row.nse = normalized_sq_error(t, &x).ok();
    }
    let result = ReconResult {
        x_hat: x,
        trace,
        converged: true,
        outer_iters: support.len(),
    };
    result.check_finite()?;
    Ok(result)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive ℓ0 oracle: least squares on every support of size at most `k`,
/// returning the fit with the smallest residual (the first one found on ties,
/// with smaller supports visited first).
pub fn brute_force_l0(y: &DVector<f64>, phi: &MeasurementMatrix, k: usize) -> Result<DVector<f64>> {
    let (m, n) = (phi.m(), phi.n());
    if y.len() != m {
        return Err(Error::dim(format!(
            "measurements have length {} but the matrix has {m} rows",
            y.len()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::input(format!("sparsity k = {k} must lie in 1..={n}")));
    }
    let total: u128 = (0..=k).map(|j| binomial(n, j)).sum();
    if total > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge(format!(
            "{total} supports for n = {n}, k = {k} exceeds the limit of {BRUTE_FORCE_LIMIT}"
        )));
    }

    let mut best = DVector::zeros(n);
    let mut best_res = y.norm_squared();
    for size in 1..=k.min(m) {
        let mut support: Vec<usize> = (0..size).collect();
        loop {
            if let Some(coef) = least_squares_on_support(phi, &support, y) {
                let x = scatter(n, &support, &coef);
                let res = (y - phi.apply(&x)).norm_squared();
                if res < best_res {
                    best_res = res;
                    best = x;
                }
            }
            if !next_combination(&mut support, n) {
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::sensing::gaussian_matrix;

    #[test]
    fn omp_single_atom() {
        let phi = gaussian_matrix(8, 12, &mut SeededRng::new(6)).unwrap();
        let y = phi.matrix().column(3) * 2.0;
        let out = omp(&y, &phi, 1, None).unwrap();
        let nz: Vec<usize> = (0..12).filter(|&i| out.x_hat[i] != 0.0).collect();
        assert_eq!(nz, vec![3]);
        assert!((out.x_hat[3] - 2.0).abs() < 1e-12);
        assert!((y - phi.apply(&out.x_hat)).norm() < 1e-12);
    }

    #[test]
    fn omp_zero_measurements() {
        let phi = gaussian_matrix(5, 9, &mut SeededRng::new(2)).unwrap();
        let out = omp(&DVector::zeros(5), &phi, 3, None).unwrap();
        assert!(out.x_hat.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn omp_recovers_one_sparse_signals() {
        for seed in 0..100u64 {
            let mut rng = SeededRng::new(seed);
            let phi = gaussian_matrix(16, 64, &mut rng).unwrap();
            let j = rng.distinct_indices(64, 1)[0];
            let mut x = DVector::zeros(64);
            x[j] = rng.standard_normal();
            let y = phi.apply(&x);
            let out = omp(&y, &phi, 1, Some(&x)).unwrap();
            assert!((out.x_hat - &x).amax() < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn omp_rejects_bad_k() {
        let phi = gaussian_matrix(4, 9, &mut SeededRng::new(2)).unwrap();
        assert!(omp(&DVector::zeros(4), &phi, 5, None).is_err());
        assert!(omp(&DVector::zeros(4), &phi, 0, None).is_err());
        assert!(omp(&DVector::zeros(3), &phi, 1, None).is_err());
    }

    #[test]
    fn omp_reports_rank_deficiency() {
        // duplicated column: after picking one copy the other is collinear
        let mut mat = DMatrix::zeros(3, 3);
        mat[(0, 0)] = 1.0;
        mat[(0, 1)] = 1.0;
        mat[(1, 2)] = 1.0;
        let phi = MeasurementMatrix::from_matrix(mat).unwrap();
        let y = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let err = omp(&y, &phi, 3, None).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }

    #[test]
    fn brute_force_recovers_exact_sparse_signal() {
        let mut rng = SeededRng::new(31);
        let phi = gaussian_matrix(8, 10, &mut rng).unwrap();
        let mut x = DVector::zeros(10);
        x[1] = 0.8;
        x[4] = -1.3;
        x[9] = 0.4;
        let y = phi.apply(&x);
        let got = brute_force_l0(&y, &phi, 3).unwrap();
        assert!((got - x).amax() < 1e-10);
        assert_eq!(brute_force_l0(&DVector::zeros(8), &phi, 3).unwrap(), DVector::zeros(10));
    }

    #[test]
    fn brute_force_guard() {
        let phi = gaussian_matrix(10, 60, &mut SeededRng::new(1)).unwrap();
        assert!(matches!(
            brute_force_l0(&DVector::zeros(10), &phi, 6),
            Err(Error::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn combinations_are_enumerated_once() {
        let mut c = vec![0, 1, 2];
        let mut count = 1;
        while next_combination(&mut c, 6) {
            count += 1;
        }
        assert_eq!(count, 20);
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(512, 0), 1);
        assert_eq!(binomial(12, 2), 66);
    }
}
