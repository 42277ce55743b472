//! The window chain's invariant measure is constant on rights-count level sets.
//!
//! Compares the closed-form level weights with a brute-force solve over all
//! `2^N` window states.
//!
//! ```bash
//! cargo run -p exwalk --example stationary_measure
//! ```

use exwalk::chain::{ergodic_speed, level_weights, stationarity_residual, stationary_bruteforce};
use exwalk::exact::speed_multi;
use exwalk::ThresholdLadder;

fn main() -> exwalk::Result<()> {
    let ladder = ThresholdLadder::new(8, vec![3, 6], vec![0.25, 0.55, 0.8])?;
    let levels = level_weights(&ladder)?;
    println!(" k  per-state prob   level mass");
    for k in 0..=ladder.window {
        println!("{k:>2}  {:.12}  {:.12}", levels.state_probability(k), levels.level_mass(k));
    }

    let formula = levels.expand()?;
    let brute = stationary_bruteforce(&ladder)?;
    let mismatch = formula.probs.iter().zip(&brute.measure.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("\n|muA - mu|_1 of the formula: {:.2e}", stationarity_residual(&ladder, &formula.probs)?);
    println!("brute-force spread within level sets: {:.2e}", brute.measure.level_spread());
    println!("max |formula - brute force|: {mismatch:.2e}");
    println!("\nergodic speed {:.15}\nclosed form   {:.15}", ergodic_speed(&ladder)?, speed_multi(&ladder)?.speed);
    Ok(())
}
