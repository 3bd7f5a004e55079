//! Support agreement between DC-GPSR and the exhaustive ℓ0 oracle on tiny
//! noiseless instances.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{hash64, SeededRng};
use crate::sensing::{gaussian_matrix, measure};
use crate::solvers::{brute_force_l0, dc_gpsr, default_rho, SolverOptions, SparseProblem};

/// Entries with `|x̂ᵢ| ≤ SUPPORT_TOL·‖x̂‖∞` are treated as zero when reading
/// off a support.
pub const SUPPORT_TOL: f64 = 1e-8;

/// Indices of the numerically nonzero entries of `x`, ascending.
pub fn support_of(x: &DVector<f64>) -> Vec<usize> {
    let peak = x.amax();
    (0..x.len()).filter(|&i| x[i] != 0.0 && x[i].abs() > SUPPORT_TOL * peak).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Length of the real unknown.
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub instances: usize,
    pub seed: u64,
    pub solver_options: SolverOptions,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n: 12,
            m: 8,
            k: 2,
            instances: 50,
            seed: 42,
            solver_options: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub index: usize,
    pub seed: u64,
    pub true_support: Vec<usize>,
    pub oracle_support: Vec<usize>,
    pub dc_support: Vec<usize>,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub cases: Vec<OracleCase>,
    pub agreements: usize,
}

/// Instance `i` draws `Φ` (M×N Gaussian), then a uniformly random `k`-subset
/// with N(0,1) values, from a generator seeded with `hash64(seed, i, 0)`;
/// `y = Φx`. DC-GPSR runs with the default `ρ`.
pub fn run_oracle_study(cfg: &OracleConfig) -> Result<OracleReport> {
    if cfg.k == 0 || cfg.k > cfg.m || cfg.m > cfg.n {
        return Err(Error::input(format!(
            "oracle study needs 1 <= k <= m <= n, got n = {}, m = {}, k = {}",
            cfg.n, cfg.m, cfg.k
        )));
    }
    let mut cases = Vec::with_capacity(cfg.instances);
    for index in 0..cfg.instances {
        let seed = hash64(cfg.seed, index as u64, 0);
        let mut rng = SeededRng::new(seed);
        let phi = gaussian_matrix(cfg.m, cfg.n, &mut rng)?;
        let mut true_support = rng.distinct_indices(cfg.n, cfg.k);
        true_support.sort_unstable();
        let mut x = DVector::zeros(cfg.n);
        for &i in &true_support {
            while x[i] == 0.0 {
                x[i] = rng.standard_normal();
            }
        }
        let y = measure(&phi, &x)?;
        let oracle_support = support_of(&brute_force_l0(&y, &phi, cfg.k)?);
        let rho = default_rho(&phi, &y, 0.0)?;
        let problem = SparseProblem::new(&phi, y, cfg.k, rho)?;
        let dc_support = support_of(&dc_gpsr(&problem, None, &cfg.solver_options, None)?.x_hat);
        cases.push(OracleCase {
            index,
            seed,
            agree: dc_support == oracle_support,
            true_support,
            oracle_support,
            dc_support,
        });
    }
    let agreements = cases.iter().filter(|c| c.agree).count();
    Ok(OracleReport { cases, agreements })
}
