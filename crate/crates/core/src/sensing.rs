//! Gaussian measurement matrices, compressed measurements and noise.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::rng::SeededRng;

/// Real `M×N` sensing matrix, used unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    phi: DMatrix<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub m: usize,
    pub n: usize,
    pub seed: Option<u64>,
}

impl MeasurementMatrix {
    pub fn from_matrix(phi: DMatrix<f64>) -> Result<Self> {
        if phi.nrows() == 0 || phi.ncols() == 0 {
            return Err(Error::dim("measurement matrix must be non-empty"));
        }
        Ok(Self { phi, seed: None })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_matrix(DMatrix::identity(n, n))
    }

    pub fn m(&self) -> usize {
        self.phi.nrows()
    }

    pub fn n(&self) -> usize {
        self.phi.ncols()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// `Φ·x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.phi * x
    }

    /// `Φᵀ·r`.
    pub fn apply_transpose(&self, r: &DVector<f64>) -> DVector<f64> {
        self.phi.tr_mul(r)
    }

    /// Power-method estimate of the largest eigenvalue of `ΦᵀΦ`.
    ///
    /// Deterministic: starts from the all-ones vector and stops once the
    /// Rayleigh quotient changes by less than `1e-12` relative.
    pub fn gram_spectral_norm(&self) -> f64 {
        let n = self.n();
        let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
        let mut lambda = 0.0;
        for _ in 0..1000 {
            let w = self.apply_transpose(&self.apply(&v));
            let next = v.dot(&w);
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            v = w / norm;
            if (next - lambda).abs() <= 1e-12 * next.abs() {
                lambda = next;
                break;
            }
            lambda = next;
        }
        // the Rayleigh quotient of the final iterate is the tighter estimate
        let w = self.apply(&v);
        lambda.max(w.norm_squared())
    }

    pub fn meta(&self) -> MatrixMeta {
        MatrixMeta {
            m: self.m(),
            n: self.n(),
            seed: self.seed,
        }
    }

    /// Writes `<stem>.csv` (row-major, no header) and `<stem>.json` (m, n, seed).
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        io::write_matrix(&dir.join(format!("{stem}.csv")), &self.phi)?;
        io::write_json(&dir.join(format!("{stem}.json")), &self.meta())
    }

    /// Reads a matrix CSV; the JSON sidecar next to it is used when present.
    pub fn read(csv_path: &Path) -> Result<Self> {
        let phi = io::read_matrix(csv_path)?;
        let sidecar = csv_path.with_extension("json");
        let seed = if sidecar.exists() {
            let meta: MatrixMeta = io::read_json(&sidecar)?;
            if meta.m != phi.nrows() || meta.n != phi.ncols() {
                return Err(Error::dim(format!(
                    "{} says {}x{} but {} holds {}x{}",
                    sidecar.display(),
                    meta.m,
                    meta.n,
                    csv_path.display(),
                    phi.nrows(),
                    phi.ncols()
                )));
            }
            meta.seed
        } else {
            None
        };
        Ok(Self { phi, seed })
    }
}

/// `m×n` matrix with i.i.d. N(0,1) entries, filled column by column.
pub fn gaussian_matrix(m: usize, n: usize, rng: &mut SeededRng) -> Result<MeasurementMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::dim(format!(
            "measurement matrix dimensions must be positive, got {m}x{n}"
        )));
    }
    let phi = DMatrix::from_fn(m, n, |_, _| rng.standard_normal());
    Ok(MeasurementMatrix {
        phi,
        seed: Some(rng.seed()),
    })
}

/// `y = Φ·x`.
pub fn measure(phi: &MeasurementMatrix, x: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != phi.n() {
        return Err(Error::dim(format!(
            "signal has length {} but the matrix has {} columns",
            x.len(),
            phi.n()
        )));
    }
    Ok(phi.apply(x))
}

/// Noise standard deviation realizing `SNR = ‖x‖²/(M·σ²)` at `snr_db` decibels.
pub fn snr_to_sigma(x: &DVector<f64>, m: usize, snr_db: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::dim("measurement count must be positive"));
    }
    let energy = x.norm_squared();
    if energy <= 0.0 {
        return Err(Error::input("SNR is undefined for a zero signal"));
    }
    if snr_db.is_nan() {
        return Err(Error::input("SNR must be a number"));
    }
    let linear = 10f64.powf(snr_db / 10.0);
    Ok((energy / (m as f64 * linear)).sqrt())
}

/// Measurements after noise injection.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisySystem {
    pub y: DVector<f64>,
    pub sigma: f64,
    pub snr_db: Option<f64>,
}

/// `y + n` with `n_i ~ N(0, σ²)`; `σ = 0` returns `y` unchanged without drawing.
pub fn add_noise(y: &DVector<f64>, sigma: f64, rng: &mut SeededRng) -> Result<NoisySystem> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::input(format!("noise level must be finite and >= 0, got {sigma}")));
    }
    let y = if sigma == 0.0 {
        y.clone()
    } else {
        y.map(|v| v + sigma * rng.standard_normal())
    };
    Ok(NoisySystem {
        y,
        sigma,
        snr_db: None,
    })
}

/// Corrupts `Φx` at the requested SNR; `None` means noiseless.
pub fn noisy_measurements(
    phi: &MeasurementMatrix,
    x: &DVector<f64>,
    snr_db: Option<f64>,
    rng: &mut SeededRng,
) -> Result<NoisySystem> {
    let clean = measure(phi, x)?;
    match snr_db {
        None => add_noise(&clean, 0.0, rng),
        Some(db) => {
            let sigma = snr_to_sigma(x, phi.m(), db)?;
            let mut sys = add_noise(&clean, sigma, rng)?;
            sys.snr_db = Some(db);
            Ok(sys)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_matrix_is_deterministic() {
        let a = gaussian_matrix(4, 6, &mut SeededRng::new(3)).unwrap();
        let b = gaussian_matrix(4, 6, &mut SeededRng::new(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed(), Some(3));
        let one = gaussian_matrix(1, 1, &mut SeededRng::new(3)).unwrap();
        assert_eq!(one.matrix()[(0, 0)], SeededRng::new(3).standard_normal());
        assert!(matches!(
            gaussian_matrix(0, 3, &mut SeededRng::new(1)),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn gaussian_matrix_statistics() {
        let phi = gaussian_matrix(128, 512, &mut SeededRng::new(2024)).unwrap();
        let n = phi.matrix().len() as f64;
        let mean = phi.matrix().sum() / n;
        let var = phi.matrix().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() <= 0.02, "mean {mean}");
        assert!((var - 1.0).abs() <= 0.05, "var {var}");
    }

    #[test]
    fn measure_identity_zero_and_linearity() {
        let eye = MeasurementMatrix::identity(3).unwrap();
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        assert_eq!(measure(&eye, &x).unwrap(), x);

        let mut rng = SeededRng::new(8);
        let phi = gaussian_matrix(5, 7, &mut rng).unwrap();
        assert_eq!(measure(&phi, &DVector::zeros(7)).unwrap(), DVector::zeros(5));

        let x1 = DVector::from_fn(7, |_, _| rng.standard_normal());
        let x2 = DVector::from_fn(7, |_, _| rng.standard_normal());
        let (a, b) = (1.7, -0.3);
        let lhs = measure(&phi, &(&x1 * a + &x2 * b)).unwrap();
        let rhs = measure(&phi, &x1).unwrap() * a + measure(&phi, &x2).unwrap() * b;
        assert!((lhs - rhs).amax() <= 1e-12);

        assert!(matches!(measure(&phi, &DVector::zeros(6)), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn snr_to_sigma_examples() {
        let x = DVector::from_vec(vec![2.0, 0.0]);
        assert!((snr_to_sigma(&x, 2, 0.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let unit = DVector::from_vec(vec![1.0]);
        assert!((snr_to_sigma(&unit, 1, 20.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(snr_to_sigma(&unit, 1, f64::INFINITY).unwrap(), 0.0);
        assert!(snr_to_sigma(&unit, 1, 300.0).unwrap() < 1e-14);
        assert!(matches!(
            snr_to_sigma(&DVector::zeros(3), 2, 10.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn add_noise_examples() {
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(add_noise(&y, 0.0, &mut SeededRng::new(1)).unwrap().y, y);
        let a = add_noise(&y, 0.5, &mut SeededRng::new(4)).unwrap();
        let b = add_noise(&y, 0.5, &mut SeededRng::new(4)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            add_noise(&y, -1.0, &mut SeededRng::new(1)),
            Err(Error::InvalidInput(_))
        ));

        let zeros = DVector::zeros(10_000);
        let noisy = add_noise(&zeros, 1.0, &mut SeededRng::new(17)).unwrap();
        let n = noisy.y.len() as f64;
        let mean = noisy.y.sum() / n;
        let var = noisy.y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() <= 0.05, "var {var}");
    }

    #[test]
    fn empirical_snr_matches_request() {
        let mut rng = SeededRng::new(99);
        let x = DVector::from_fn(64, |_, _| rng.standard_normal());
        let m = 20_000;
        for snr_db in [5.0, 15.0, 25.0] {
            let sigma = snr_to_sigma(&x, m, snr_db).unwrap();
            let noise = add_noise(&DVector::zeros(m), sigma, &mut rng).unwrap().y;
            let var = noise.norm_squared() / m as f64;
            let measured = 10.0 * (x.norm_squared() / (m as f64 * var)).log10();
            assert!((measured - snr_db).abs() <= 0.5, "{measured} vs {snr_db}");
        }
    }

    #[test]
    fn matrix_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let phi = gaussian_matrix(3, 5, &mut SeededRng::new(12)).unwrap();
        phi.write(dir.path(), "phi").unwrap();
        let back = MeasurementMatrix::read(&dir.path().join("phi.csv")).unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn spectral_norm_estimate() {
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0, 2.0]));
        let phi = MeasurementMatrix::from_matrix(diag).unwrap();
        assert!((phi.gram_spectral_norm() - 9.0).abs() < 1e-9);
    }
}
