//! Sparse reconstruction solvers.
//!
//! All solvers take a [`SparseProblem`] (measurements, matrix, sparsity bound
//! and penalty weight) and return a [`ReconResult`] with a per-iteration
//! [`SolverTrace`].

mod bcqp;
mod convex;
mod dc;
mod greedy;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::metrics::normalized_sq_error;
use crate::sensing::MeasurementMatrix;
use crate::sparsity::sparsity_gap;

pub use bcqp::{bcqp_gradient, bcqp_objective, solve_bcqp_gp, InnerSolve};
pub use convex::{gpsr_baseline, ista};
pub use dc::{dc_gpsr, dc_proximal, solve_linearized_prox, ProxSolve};
pub use greedy::{brute_force_l0, least_squares_on_support, omp, BRUTE_FORCE_LIMIT};

/// One reconstruction instance.
#[derive(Debug)]
pub struct SparseProblem<'a> {
    phi: &'a MeasurementMatrix,
    y: DVector<f64>,
    k: usize,
    rho: f64,
    gram_norm: OnceLock<f64>,
}

impl<'a> SparseProblem<'a> {
    pub fn new(phi: &'a MeasurementMatrix, y: DVector<f64>, k: usize, rho: f64) -> Result<Self> {
        if y.len() != phi.m() {
            return Err(Error::dim(format!(
                "measurements have length {} but the matrix has {} rows",
                y.len(),
                phi.m()
            )));
        }
        if k == 0 || k > phi.n() {
            return Err(Error::input(format!(
                "sparsity bound k = {k} must lie in 1..={}",
                phi.n()
            )));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::input(format!("penalty weight must be positive, got {rho}")));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("measurements contain non-finite values"));
        }
        Ok(Self {
            phi,
            y,
            k,
            rho,
            gram_norm: OnceLock::new(),
        })
    }

    /// Uses the data-driven weight of [`default_rho`] for noise standard
    /// deviation `sigma` (`0` for noiseless measurements).
    pub fn with_default_rho(
        phi: &'a MeasurementMatrix,
        y: DVector<f64>,
        k: usize,
        sigma: f64,
    ) -> Result<Self> {
        if y.len() != phi.m() {
            return Self::new(phi, y, k, 1.0);
        }
        let rho = default_rho(phi, &y, sigma)?;
        Self::new(phi, y, k, rho)
    }

    pub fn phi(&self) -> &MeasurementMatrix {
        self.phi
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn m(&self) -> usize {
        self.phi.m()
    }

    pub fn n(&self) -> usize {
        self.phi.n()
    }

    /// Largest eigenvalue of `ΦᵀΦ`, estimated once per problem.
    pub fn gram_norm(&self) -> f64 {
        *self.gram_norm.get_or_init(|| self.phi.gram_spectral_norm())
    }

    pub(crate) fn check_len(&self, x: &DVector<f64>, what: &str) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::dim(format!(
                "{what} has length {} but the problem dimension is {}",
                x.len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// `Φx − y`.
    pub(crate) fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut r = self.phi.apply(x);
        r -= &self.y;
        r
    }
}

/// Fraction of `‖Φᵀy‖∞` in [`default_rho`].
pub const RHO_SIGNAL_FRACTION: f64 = 1e-3;

/// Default penalty weight `ρ = 10⁻³·‖Φᵀy‖∞ + σ·√(M·ln(2N)/2)`.
///
/// The DC penalty only acts on entries outside the current top-K set, so a
/// small signal-relative weight keeps the first (pure ℓ1) step close to
/// basis pursuit, which is what lets the DC iterations lock onto the support.
/// With noise, entries outside the support must additionally be held at zero
/// against `Φᵀn`, whose largest entry is about `σ·√(2M·ln(2N))`; half of that
/// bound is added. Falls back to `1` when the result is not positive (`Φᵀy = 0`
/// and `σ = 0`, where every positive weight gives `x = 0`).
pub fn default_rho(phi: &MeasurementMatrix, y: &DVector<f64>, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::input(format!("noise level must be finite and >= 0, got {sigma}")));
    }
    let peak = phi.apply_transpose(y).amax();
    let noise = sigma * (phi.m() as f64 * (2.0 * phi.n() as f64).ln() / 2.0).sqrt();
    let rho = RHO_SIGNAL_FRACTION * peak + noise;
    Ok(if rho > 0.0 && rho.is_finite() { rho } else { 1.0 })
}

/// `½‖y − Φx‖² + ρ(‖x‖₁ − ‖x‖_{K,1})`.
pub fn objective_f(x: &DVector<f64>, p: &SparseProblem) -> Result<f64> {
    p.check_len(x, "estimate")?;
    let fit = 0.5 * p.residual(x).norm_squared();
    Ok(fit + p.rho * sparsity_gap(x.as_slice(), p.k)?)
}

/// `½‖y − Φx‖² + ρ‖x‖₁`.
pub fn objective_l1(x: &DVector<f64>, p: &SparseProblem) -> Result<f64> {
    p.check_len(x, "estimate")?;
    let fit = 0.5 * p.residual(x).norm_squared();
    Ok(fit + p.rho * x.lp_norm(1))
}

/// Both objectives from a precomputed squared residual norm.
pub(crate) fn objectives_from_residual(x: &DVector<f64>, p: &SparseProblem, res_sq: f64) -> (f64, f64) {
    let fit = 0.5 * res_sq;
    let gap = sparsity_gap(x.as_slice(), p.k).unwrap_or(f64::NAN);
    (fit + p.rho * gap, fit + p.rho * x.lp_norm(1))
}

/// Iteration caps, tolerances and step-size safeguards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Outer DC loop stops once `‖z^t − z^{t−1}‖₂` drops to this value.
    pub outer_tol: f64,
    pub outer_max: usize,
    /// Inner loops stop when the objective decrease relative to the objective
    /// value drops to this value.
    pub inner_tol: f64,
    pub inner_max: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Inflation applied to the power-method estimate of `‖ΦᵀΦ‖` (proximal
    /// methods only).
    pub lipschitz_margin: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            outer_tol: 1e-14,
            outer_max: 50,
            inner_tol: 1e-24,
            inner_max: 50_000,
            alpha_min: 1e-30,
            alpha_max: 1e30,
            lipschitz_margin: 1.01,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::config(field, msg));
        if !(self.outer_tol > 0.0) {
            return bad("outer_tol", format!("must be > 0, got {}", self.outer_tol));
        }
        if !(self.inner_tol > 0.0) {
            return bad("inner_tol", format!("must be > 0, got {}", self.inner_tol));
        }
        if self.outer_max == 0 {
            return bad("outer_max", "must be >= 1".into());
        }
        if self.inner_max == 0 {
            return bad("inner_max", "must be >= 1".into());
        }
        if !(self.alpha_min > 0.0 && self.alpha_min < self.alpha_max) {
            return bad(
                "alpha_min",
                format!(
                    "need 0 < alpha_min < alpha_max, got {} and {}",
                    self.alpha_min, self.alpha_max
                ),
            );
        }
        if !(self.lipschitz_margin >= 1.0) || !self.lipschitz_margin.is_finite() {
            return bad(
                "lipschitz_margin",
                format!("must be finite and >= 1, got {}", self.lipschitz_margin),
            );
        }
        Ok(())
    }
}

/// One trace row. The meaning of an iteration depends on the solver: outer DC
/// steps for the DC solvers, gradient or shrinkage steps for GPSR and ISTA,
/// greedy rounds for OMP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub outer_iter: usize,
    pub inner_iter_cumulative: usize,
    #[serde(rename = "F")]
    pub objective_f: f64,
    #[serde(rename = "l1_objective")]
    pub objective_l1: f64,
    #[serde(rename = "normalized_sq_error")]
    pub nse: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub rows: Vec<TraceRow>,
}

impl SolverTrace {
    pub(crate) fn push(
        &mut self,
        outer_iter: usize,
        inner_iters: usize,
        x: &DVector<f64>,
        p: &SparseProblem,
        res_sq: f64,
        truth: Option<&DVector<f64>>,
    ) {
        let (f, l1) = objectives_from_residual(x, p, res_sq);
        let cumulative = self.rows.last().map_or(0, |r| r.inner_iter_cumulative) + inner_iters;
        let nse = truth.and_then(|t| normalized_sq_error(t, x).ok());
        self.rows.push(TraceRow {
            outer_iter,
            inner_iter_cumulative: cumulative,
            objective_f: f,
            objective_l1: l1,
            nse,
        });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn outer_objectives(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.objective_f).collect()
    }

    pub fn l1_objectives(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.objective_l1).collect()
    }

    /// Normalized squared errors; empty when no ground truth was supplied.
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.nse).collect()
    }

    pub fn inner_counts(&self) -> Vec<usize> {
        let mut prev = 0;
        self.rows
            .iter()
            .map(|r| {
                let c = r.inner_iter_cumulative - prev;
                prev = r.inner_iter_cumulative;
                c
            })
            .collect()
    }

    pub fn inner_total(&self) -> usize {
        self.rows.last().map_or(0, |r| r.inner_iter_cumulative)
    }

    /// CSV with columns `outer_iter,inner_iter_cumulative,F,l1_objective,normalized_sq_error`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let mut w = csv::Writer::from_path(path)?;
        if self.rows.is_empty() {
            w.write_record([
                "outer_iter",
                "inner_iter_cumulative",
                "F",
                "l1_objective",
                "normalized_sq_error",
            ])?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconResult {
    pub x_hat: DVector<f64>,
    pub trace: SolverTrace,
    pub converged: bool,
    pub outer_iters: usize,
}

/// JSON summary of a reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconSummary {
    pub converged: bool,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub objective_f: Option<f64>,
    pub objective_l1: Option<f64>,
    pub normalized_sq_error: Option<f64>,
}

impl ReconResult {
    pub fn inner_iters_total(&self) -> usize {
        self.trace.inner_total()
    }

    pub fn summary(&self) -> ReconSummary {
        let last = self.trace.rows.last();
        ReconSummary {
            converged: self.converged,
            outer_iters: self.outer_iters,
            inner_iters: self.inner_iters_total(),
            objective_f: last.map(|r| r.objective_f),
            objective_l1: last.map(|r| r.objective_l1),
            normalized_sq_error: last.and_then(|r| r.nse),
        }
    }

    /// Writes `x_hat.csv` (one column) and `summary.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        io::write_real_vector(&dir.join("x_hat.csv"), "x_hat", self.x_hat.as_slice())?;
        io::write_json(&dir.join("summary.json"), &self.summary())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.x_hat.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure {
                iteration: self.inner_iters_total(),
                message: "estimate contains non-finite values".into(),
            });
        }
        Ok(())
    }
}

/// Solver selector used by the experiment harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    DcGpsr,
    DcProximal,
    Gpsr,
    Ista,
    Omp,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::DcGpsr,
        SolverKind::DcProximal,
        SolverKind::Gpsr,
        SolverKind::Ista,
        SolverKind::Omp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::DcGpsr => "dc_gpsr",
            SolverKind::DcProximal => "dc_proximal",
            SolverKind::Gpsr => "gpsr",
            SolverKind::Ista => "ista",
            SolverKind::Omp => "omp",
        }
    }

    /// Runs the solver from the zero vector.
    pub fn run(
        self,
        p: &SparseProblem,
        opts: &SolverOptions,
        truth: Option<&DVector<f64>>,
    ) -> Result<ReconResult> {
        match self {
            SolverKind::DcGpsr => dc_gpsr(p, None, opts, truth),
            SolverKind::DcProximal => dc_proximal(p, None, opts, truth),
            SolverKind::Gpsr => gpsr_baseline(p, None, opts, truth),
            SolverKind::Ista => ista(p, None, opts, truth),
            SolverKind::Omp => omp(p.y(), p.phi(), p.k(), truth),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| {
                Error::input(format!(
                    "unknown solver `{s}` (expected one of dc_gpsr, dc_proximal, gpsr, ista, omp)"
                ))
            })
    }
}
