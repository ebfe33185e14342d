//! Degree-preserving null networks and the p-value of cp-centralization.
//!
//! `cargo run --example significance`

use specnet::randomization::{cp_significance, degree_preserving_randomize, DEFAULT_SWAP_FACTOR};
use specnet::synthetic::planted_core_periphery;

fn main() -> specnet::Result<()> {
    let net = planted_core_periphery(40, 10, 0.05, 7)?;
    let null = degree_preserving_randomize(&net, 1, DEFAULT_SWAP_FACTOR)?;
    println!(
        "one null: {} swaps accepted of {} attempts, degrees kept: {}",
        null.accepted_swaps,
        null.attempts,
        null.network.degrees() == net.degrees()
    );

    let sig = cp_significance(&net, 100, 42, DEFAULT_SWAP_FACTOR)?;
    let mean = sig.null_values.iter().sum::<f64>() / sig.null_values.len() as f64;
    println!(
        "observed {:.3}, null mean {mean:.3}, p = {:.3} ({} skipped)",
        sig.observed, sig.p_value, sig.skipped
    );
    Ok(())
}
