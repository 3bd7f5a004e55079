//! Massive-MIMO channel realizations for a half-wavelength uniform linear array.
//!
//! The spatial-domain channel is a scaled sum of array steering vectors; the
//! angular-domain channel is obtained with the unitary DFT matrix whose rows are
//! conjugated steering vectors on the grid `φᵢ = (i − (N+1)/2) / N`. Solvers
//! consume the real vector `[Re(h_a); Im(h_a)]` of length `2N`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::rng::SeededRng;

/// One propagation path: complex gain and spatial direction `φ = (d/λ)·sin θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub gain: Complex64,
    pub spatial_direction: f64,
}

impl PathSpec {
    pub fn new(gain: Complex64, spatial_direction: f64) -> Result<Self> {
        check_direction(spatial_direction)?;
        Ok(Self {
            gain,
            spatial_direction,
        })
    }

    /// Direction from a physical angle (radians) with half-wavelength spacing.
    pub fn from_angle(gain: Complex64, theta: f64) -> Result<Self> {
        Self::new(gain, 0.5 * theta.sin())
    }
}

fn check_direction(phi: f64) -> Result<()> {
    if !(-0.5..=0.5).contains(&phi) {
        return Err(Error::input(format!(
            "spatial direction {phi} outside [-0.5, 0.5]"
        )));
    }
    Ok(())
}

/// Unit-norm steering vector, element `i` equal to `exp(−j2π·phi·i)/√n`.
pub fn steering_vector(phi: f64, n: usize) -> Result<DVector<Complex64>> {
    if n == 0 {
        return Err(Error::dim("steering vector needs at least one antenna"));
    }
    check_direction(phi)?;
    let scale = 1.0 / (n as f64).sqrt();
    Ok(DVector::from_fn(n, |i, _| {
        Complex64::from_polar(scale, -2.0 * PI * phi * i as f64)
    }))
}

/// `√(n/N_p) · Σ_l β⁽ˡ⁾ α(φ⁽ˡ⁾)`.
pub fn spatial_channel(paths: &[PathSpec], n: usize) -> Result<DVector<Complex64>> {
    if paths.is_empty() {
        return Err(Error::input("spatial channel needs at least one path"));
    }
    let mut h = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for path in paths {
        let a = steering_vector(path.spatial_direction, n)?;
        h.axpy(path.gain, &a, Complex64::new(1.0, 0.0));
    }
    let scale = (n as f64 / paths.len() as f64).sqrt();
    Ok(h * Complex64::new(scale, 0.0))
}

/// Grid direction of row `i` (0-based) of the `n`-point DFT matrix.
pub fn grid_direction(i: usize, n: usize) -> f64 {
    ((i + 1) as f64 - (n as f64 + 1.0) / 2.0) / n as f64
}

/// `U = [α(φ₁), …, α(φ_N)]ᴴ`; unitary.
pub fn dft_matrix(n: usize) -> Result<DMatrix<Complex64>> {
    if n == 0 {
        return Err(Error::dim("DFT matrix needs n >= 1"));
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(DMatrix::from_fn(n, n, |i, k| {
        Complex64::from_polar(scale, 2.0 * PI * grid_direction(i, n) * k as f64)
    }))
}

fn check_square(u: &DMatrix<Complex64>, len: usize) -> Result<()> {
    if u.nrows() != u.ncols() || u.ncols() != len {
        return Err(Error::dim(format!(
            "transform is {}x{} but the vector has length {len}",
            u.nrows(),
            u.ncols()
        )));
    }
    Ok(())
}

/// Angular-domain channel `U·h_s`.
pub fn to_angular(h_spatial: &DVector<Complex64>, u: &DMatrix<Complex64>) -> Result<DVector<Complex64>> {
    check_square(u, h_spatial.len())?;
    Ok(u * h_spatial)
}

/// Inverse transform `Uᴴ·h_a`.
pub fn to_spatial(h_angular: &DVector<Complex64>, u: &DMatrix<Complex64>) -> Result<DVector<Complex64>> {
    check_square(u, h_angular.len())?;
    Ok(u.ad_mul(h_angular))
}

/// `[Re(h); Im(h)]`.
pub fn concat_real(h: &DVector<Complex64>) -> DVector<f64> {
    let n = h.len();
    DVector::from_fn(2 * n, |i, _| if i < n { h[i].re } else { h[i - n].im })
}

/// Inverse of [`concat_real`]: pairs the first and second halves.
pub fn split_real(x: &DVector<f64>) -> Result<DVector<Complex64>> {
    if !x.len().is_multiple_of(2) {
        return Err(Error::dim(format!(
            "real-form vector must have even length, got {}",
            x.len()
        )));
    }
    let n = x.len() / 2;
    Ok(DVector::from_fn(n, |i, _| Complex64::new(x[i], x[i + n])))
}

/// One channel realization and its real-form sparse vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub h_spatial: DVector<Complex64>,
    pub h_angular: DVector<Complex64>,
    pub x_real: DVector<f64>,
    /// Number of nonzero complex entries of `h_angular`.
    pub sparsity: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelMeta {
    pub n: usize,
    pub sparsity: usize,
    pub seed: u64,
}

impl ChannelSample {
    /// Builds a sample from its angular representation.
    pub fn from_angular(h_angular: DVector<Complex64>, seed: u64) -> Result<Self> {
        let u = dft_matrix(h_angular.len())?;
        let h_spatial = to_spatial(&h_angular, &u)?;
        let sparsity = h_angular.iter().filter(|c| **c != Complex64::new(0.0, 0.0)).count();
        let x_real = concat_real(&h_angular);
        Ok(Self {
            h_spatial,
            h_angular,
            x_real,
            sparsity,
            seed,
        })
    }

    /// Builds a sample from a spatial channel, e.g. one made by [`spatial_channel`].
    pub fn from_spatial(h_spatial: DVector<Complex64>, seed: u64) -> Result<Self> {
        let u = dft_matrix(h_spatial.len())?;
        let h_angular = to_angular(&h_spatial, &u)?;
        let sparsity = h_angular.iter().filter(|c| **c != Complex64::new(0.0, 0.0)).count();
        let x_real = concat_real(&h_angular);
        Ok(Self {
            h_spatial,
            h_angular,
            x_real,
            sparsity,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.h_angular.len()
    }

    pub fn meta(&self) -> ChannelMeta {
        ChannelMeta {
            n: self.n(),
            sparsity: self.sparsity,
            seed: self.seed,
        }
    }

    /// Writes `h_spatial.csv`, `h_angular.csv`, `x_real.csv` and `channel.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        io::write_complex_vector(&dir.join("h_spatial.csv"), "h_spatial", self.h_spatial.as_slice())?;
        io::write_complex_vector(&dir.join("h_angular.csv"), "h_angular", self.h_angular.as_slice())?;
        io::write_real_vector(&dir.join("x_real.csv"), "x_real", self.x_real.as_slice())?;
        io::write_json(&dir.join("channel.json"), &self.meta())
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let meta: ChannelMeta = io::read_json(&dir.join("channel.json"))?;
        let (_, h_spatial) = io::read_complex_vector(&dir.join("h_spatial.csv"))?;
        let (_, h_angular) = io::read_complex_vector(&dir.join("h_angular.csv"))?;
        let (_, x_real) = io::read_real_vector(&dir.join("x_real.csv"))?;
        if h_spatial.len() != meta.n || h_angular.len() != meta.n || x_real.len() != 2 * meta.n {
            return Err(Error::dim(format!(
                "channel files in {} disagree with n = {}",
                dir.display(),
                meta.n
            )));
        }
        Ok(Self {
            h_spatial: DVector::from_vec(h_spatial),
            h_angular: DVector::from_vec(h_angular),
            x_real: DVector::from_vec(x_real),
            sparsity: meta.sparsity,
            seed: meta.seed,
        })
    }
}

/// Circularly-symmetric complex standard normal draw, never exactly zero.
fn complex_normal_nonzero(rng: &mut SeededRng) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    loop {
        let c = Complex64::new(rng.standard_normal() * s, rng.standard_normal() * s);
        if c.re != 0.0 || c.im != 0.0 {
            return c;
        }
    }
}

/// Draws a `sparsity`-sparse angular channel with CN(0,1) gains on a uniformly
/// random support.
pub fn sample_sparse_channel(n: usize, sparsity: usize, rng: &mut SeededRng) -> Result<ChannelSample> {
    if n == 0 {
        return Err(Error::dim("channel needs at least one antenna"));
    }
    if sparsity == 0 || sparsity > n {
        return Err(Error::input(format!(
            "sparsity {sparsity} must lie in 1..={n}"
        )));
    }
    let mut support = rng.distinct_indices(n, sparsity);
    support.sort_unstable();
    let mut h_angular = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for &i in &support {
        h_angular[i] = complex_normal_nonzero(rng);
    }
    let mut sample = ChannelSample::from_angular(h_angular, rng.seed())?;
    sample.sparsity = sparsity;
    Ok(sample)
}

/// Random physical paths: directions uniform on `[−1/2, 1/2)`, gains CN(0,1).
pub fn sample_paths(num_paths: usize, rng: &mut SeededRng) -> Result<Vec<PathSpec>> {
    if num_paths == 0 {
        return Err(Error::input("need at least one path"));
    }
    (0..num_paths)
        .map(|_| {
            let phi = rng.uniform(-0.5, 0.5);
            PathSpec::new(complex_normal_nonzero(rng), phi)
        })
        .collect()
}
