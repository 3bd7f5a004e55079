//! Reconstruction error measures, computed on the real-form vectors.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `‖x_true − x_hat‖² / ‖x_true‖²`.
pub fn normalized_sq_error(x_true: &DVector<f64>, x_hat: &DVector<f64>) -> Result<f64> {
    if x_true.len() != x_hat.len() {
        return Err(Error::dim(format!(
            "ground truth has length {} but the estimate has length {}",
            x_true.len(),
            x_hat.len()
        )));
    }
    let energy = x_true.norm_squared();
    if energy <= 0.0 {
        return Err(Error::input("normalized error is undefined for a zero ground truth"));
    }
    Ok((x_true - x_hat).norm_squared() / energy)
}

/// Mean of the per-sample normalized squared errors.
pub fn nmse<'a, I>(pairs: I) -> Result<f64>
where
    I: IntoIterator<Item = (&'a DVector<f64>, &'a DVector<f64>)>,
{
    let errors = pairs
        .into_iter()
        .map(|(t, h)| normalized_sq_error(t, h))
        .collect::<Result<Vec<_>>>()?;
    mean_error(&errors)
}

/// Mean of already computed per-sample errors.
pub fn mean_error(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::input("NMSE needs at least one sample"));
    }
    Ok(errors.iter().sum::<f64>() / errors.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleError {
    pub sample_index: usize,
    pub nse: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn normalized_error_examples() {
        let x = v(&[1.0, -2.0, 0.5]);
        assert_eq!(normalized_sq_error(&x, &x).unwrap(), 0.0);
        assert_eq!(normalized_sq_error(&x, &DVector::zeros(3)).unwrap(), 1.0);
        assert_eq!(normalized_sq_error(&x, &(&x * 2.0)).unwrap(), 1.0);
        assert!(matches!(
            normalized_sq_error(&DVector::zeros(2), &v(&[1.0, 0.0])),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            normalized_sq_error(&x, &v(&[1.0])),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn nmse_examples() {
        let a = v(&[1.0, 0.0]);
        let b = v(&[0.0, 3.0]);
        assert_eq!(nmse([(&a, &a), (&b, &b)]).unwrap(), 0.0);
        let half = v(&[0.5, 0.0]);
        assert_eq!(nmse([(&a, &half)]).unwrap(), normalized_sq_error(&a, &half).unwrap());
        let zero = DVector::zeros(2);
        assert_eq!(nmse([(&a, &a), (&b, &zero)]).unwrap(), 0.5);
        let empty: Vec<(&DVector<f64>, &DVector<f64>)> = Vec::new();
        assert!(matches!(nmse(empty), Err(Error::InvalidInput(_))));
    }

    proptest! {
        #[test]
        fn error_scales_quadratically(
            pairs in prop::collection::vec((0.5f64..2.0, -2.0f64..2.0), 1..16),
            c in -4.0f64..4.0,
        ) {
            let (t, h): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let (t, h) = (v(&t), v(&h));
            let base = normalized_sq_error(&t, &h).unwrap();
            let scaled = &t + (&h - &t) * c;
            let got = normalized_sq_error(&t, &scaled).unwrap();
            prop_assert!((got - c * c * base).abs() <= 1e-12 * (1.0 + got.abs()));
        }

        #[test]
        fn nmse_is_permutation_invariant_mean(
            samples in prop::collection::vec(prop::collection::vec((0.5f64..2.0, -2.0f64..2.0), 4), 1..10),
            rotate in 0usize..10,
        ) {
            let pairs: Vec<(DVector<f64>, DVector<f64>)> = samples
                .into_iter()
                .map(|s| {
                    let (t, h): (Vec<f64>, Vec<f64>) = s.into_iter().unzip();
                    (v(&t), v(&h))
                })
                .collect();
            let forward = nmse(pairs.iter().map(|(t, h)| (t, h))).unwrap();
            let mut shuffled: Vec<_> = pairs.iter().collect();
            let len = shuffled.len();
            shuffled.rotate_left(rotate % len);
            shuffled.reverse();
            let permuted = nmse(shuffled.into_iter().map(|(t, h)| (t, h))).unwrap();
            let per: Vec<f64> = pairs.iter().map(|(t, h)| normalized_sq_error(t, h).unwrap()).collect();
            let mean = per.iter().sum::<f64>() / per.len() as f64;
            prop_assert!((forward - permuted).abs() <= 1e-15);
            prop_assert!((forward - mean).abs() <= 1e-15);
        }
    }
}
