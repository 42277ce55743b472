//! Late increments behave like independent coin flips with the governing probability.
//!
//! ```bash
//! cargo run --release -p exwalk --example weak_convergence
//! ```

use exwalk::simulate::increment_census;
use exwalk::ThresholdLadder;

fn main() -> exwalk::Result<()> {
    let ladder = ThresholdLadder::single(200, 100, 0.5, 0.8)?;
    for burn_in in [0u64, 1_000, 100_000] {
        let c = increment_census(&ladder, burn_in, 1_000, 100, 7)?;
        println!(
            "burn-in {burn_in:>6}: band {} (p = {}), frequency {:.5}, z = {:+.2}",
            c.band, c.expected, c.frequency_plus, c.z_score
        );
        if burn_in == 100_000 {
            println!("  pattern  observed  product law  z");
            for idx in 0..8 {
                let name: String = (0..3).rev().map(|b| if idx >> b & 1 == 1 { '+' } else { '-' }).collect();
                let freq = c.pattern_counts[idx] as f64 / c.pattern_trials as f64;
                println!("  {name}      {freq:.5}   {:.5}      {:+.2}", c.pattern_expected(idx), c.pattern_z(idx));
            }
        }
    }
    Ok(())
}
