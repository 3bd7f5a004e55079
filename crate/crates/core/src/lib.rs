//! Sparse signal recovery with an exact sparsity penalty.
//!
//! The least-squares objective is penalized by `ρ (‖x‖₁ − ‖x‖_{K,1})`, which is
//! zero exactly when `x` has at most `K` nonzeros. The nonconvex problem is
//! solved by difference-of-convex iterations whose convex subproblems are
//! bound-constrained quadratic programs handled by Barzilai-Borwein gradient
//! projection ([`solvers::dc_gpsr`]).
//!
//! Alongside the solver the crate ships:
//!
//! - [`channel_model`]: uniform-linear-array steering vectors, the unitary
//!   angular-domain transform and sparse angular channel sampling.
//! - [`sensing`]: Gaussian measurement matrices and SNR-calibrated noise.
//! - [`sparsity`]: the top-(K,1) norm, its subgradient and the projection and
//!   shrinkage primitives shared by all solvers.
//! - [`solvers`]: DC-GPSR, a DC proximal variant, GPSR, ISTA, OMP and an
//!   exhaustive ℓ0 oracle.
//! - [`metrics`]: normalized squared error and NMSE.
//! - [`harness`]: declarative experiments, result persistence and the CLI.
//!
//! ```
//! use dcgpsr::prelude::*;
//!
//! let mut rng = SeededRng::new(7);
//! let channel = sample_sparse_channel(32, 3, &mut rng).unwrap();
//! let phi = gaussian_matrix(40, 64, &mut rng).unwrap();
//! let y = measure(&phi, &channel.x_real).unwrap();
//! let problem = SparseProblem::with_default_rho(&phi, y, 6, 0.0).unwrap();
//! let result = dc_gpsr(&problem, None, &SolverOptions::default(), Some(&channel.x_real)).unwrap();
//! let err = normalized_sq_error(&channel.x_real, &result.x_hat).unwrap();
//! assert!(err < 1e-12);
//! ```

// `!(v > 0.0)` is the deliberate way to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel_model;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod sensing;
pub mod solvers;
pub mod sparsity;

pub use error::{Error, Result};

/// Common imports for examples and downstream code.
pub mod prelude {
    pub use crate::channel_model::{
        concat_real, dft_matrix, sample_sparse_channel, spatial_channel, split_real,
        steering_vector, to_angular, to_spatial, ChannelSample, PathSpec,
    };
    pub use crate::error::{Error, Result};
    pub use crate::metrics::{nmse, normalized_sq_error};
    pub use crate::rng::SeededRng;
    pub use crate::sensing::{
        add_noise, gaussian_matrix, measure, noisy_measurements, snr_to_sigma, MeasurementMatrix,
    };
    pub use crate::solvers::{
        brute_force_l0, dc_gpsr, dc_proximal, gpsr_baseline, ista, omp, ReconResult, SolverKind,
        SolverOptions, SparseProblem,
    };
    pub use crate::sparsity::{sparsity_gap, top_k1_norm, top_k1_subgradient};
}
