//! Exhaustive ℓ0 search as ground truth for tiny problems, and how often
//! DC-GPSR finds the same support.
//!
//! ```text
//! cargo run --release --example l0_oracle
//! ```

use dcgpsr::harness::{run_oracle_study, support_of, OracleConfig};
use dcgpsr::prelude::*;
use nalgebra::DVector;

fn main() -> dcgpsr::Result<()> {
    let mut rng = SeededRng::new(5);
    let phi = gaussian_matrix(6, 10, &mut rng)?;
    let mut x = DVector::zeros(10);
    x[2] = 1.5;
    x[7] = -0.8;
    let y = measure(&phi, &x)?;
    let best = brute_force_l0(&y, &phi, 2)?;
    println!("true support {:?}, oracle support {:?}", support_of(&x), support_of(&best));

    let report = run_oracle_study(&OracleConfig::default())?;
    println!("DC-GPSR matches the oracle on {}/{} instances", report.agreements, report.cases.len());
    for c in report.cases.iter().filter(|c| !c.agree) {
        println!("  instance {}: oracle {:?}, DC-GPSR {:?}", c.index, c.oracle_support, c.dc_support);
    }
    Ok(())
}
