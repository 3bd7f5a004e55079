//! The top-(K,1) norm and the exact sparsity gap `‖x‖₁ − ‖x‖_{K,1}`.
//!
//! ```text
//! cargo run --example top_k_norm
//! ```

use dcgpsr::sparsity::{sparsity_gap, top_k1_norm, top_k1_subgradient};

fn main() -> dcgpsr::Result<()> {
    let x = [3.0, -1.0, 0.0, 2.0, -0.5];
    println!("x = {x:?}");
    for k in 1..=x.len() {
        println!(
            "k = {k}: top-(k,1) norm {:>4}, gap {:>4}, subgradient {:?}",
            top_k1_norm(&x, k)?,
            sparsity_gap(&x, k)?,
            top_k1_subgradient(&x, k)?.w
        );
    }
    println!("the gap vanishes exactly once k reaches the 4 nonzeros of x");
    Ok(())
}
