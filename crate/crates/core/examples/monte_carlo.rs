//! Monte Carlo speed estimates against the exact value.
//!
//! ```bash
//! cargo run --release -p exwalk --example monte_carlo
//! ```

use std::time::Instant;

use exwalk::exact::speed_multi;
use exwalk::simulate::{estimate_speed, Walker};
use exwalk::ThresholdLadder;

fn main() -> exwalk::Result<()> {
    let ladder = ThresholdLadder::new(12, vec![4, 9], vec![0.3, 0.6, 0.85])?;
    let exact = speed_multi(&ladder)?.speed;

    let mut walker = Walker::new(&ladder, 1)?;
    let path: String = (0..60).map(|_| if walker.step() { '+' } else { '-' }).collect();
    println!("first excited steps: {path}");

    for steps in [100_000u64, 1_000_000, 10_000_000] {
        let start = Instant::now();
        let sim = estimate_speed(&ladder, steps, 32, 2024)?;
        let se = sim.stderr.unwrap_or(f64::NAN);
        println!(
            "{steps:>9} steps x 32: {:.6} ± {se:.1e} (exact {exact:.6}, z = {:+.2}) in {:.2?}",
            sim.empirical_speed,
            (sim.empirical_speed - exact) / se,
            start.elapsed()
        );
    }
    Ok(())
}
