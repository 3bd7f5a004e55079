//! Angular-domain sparsity of a uniform-linear-array channel.
//!
//! Paths on the DFT grid give an exactly sparse angular channel; off-grid
//! paths leak into neighbouring bins. The sparse sampler used by the
//! experiments draws on-grid channels directly.
//!
//! ```text
//! cargo run --example channel_model
//! ```

use dcgpsr::channel_model::{grid_direction, sample_sparse_channel, spatial_channel, ChannelSample, PathSpec};
use dcgpsr::rng::SeededRng;
use num_complex::Complex64;

fn count_above(sample: &ChannelSample, rel: f64) -> usize {
    let peak = sample.h_angular.iter().map(|c| c.norm()).fold(0.0, f64::max);
    sample.h_angular.iter().filter(|c| c.norm() > rel * peak).count()
}

fn main() -> dcgpsr::Result<()> {
    let n = 64;

    let on_grid = [
        PathSpec::new(Complex64::new(1.0, 0.5), grid_direction(10, n))?,
        PathSpec::new(Complex64::new(-0.3, 0.8), grid_direction(41, n))?,
    ];
    let sample = ChannelSample::from_spatial(spatial_channel(&on_grid, n)?, 0)?;
    println!("on-grid paths:   {} angular bins above 1e-9 of the peak", count_above(&sample, 1e-9));

    let off_grid = [PathSpec::from_angle(Complex64::new(1.0, 0.0), 0.3)?];
    let sample = ChannelSample::from_spatial(spatial_channel(&off_grid, n)?, 0)?;
    println!("off-grid path:   {} bins above 1e-2 of the peak (leakage)", count_above(&sample, 1e-2));

    let mut rng = SeededRng::new(3);
    let sparse = sample_sparse_channel(n, 4, &mut rng)?;
    let nonzero: Vec<usize> = (0..n).filter(|&i| sparse.h_angular[i].norm() > 0.0).collect();
    println!("sampled channel: support {nonzero:?}");
    println!(
        "real form:       length {}, {} nonzeros, energy {:.4} (equal to the spatial energy {:.4})",
        sparse.x_real.len(),
        sparse.x_real.iter().filter(|v| **v != 0.0).count(),
        sparse.x_real.norm_squared(),
        sparse.h_spatial.norm_squared()
    );
    Ok(())
}
