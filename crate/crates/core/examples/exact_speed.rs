//! Exact speed of a finite-window walk, with the per-band decomposition.
//!
//! ```bash
//! cargo run -p exwalk --example exact_speed
//! ```

use exwalk::exact::{speed_consecutive_oracle, speed_multi, speed_multi_rational};
use exwalk::ThresholdLadder;

fn main() -> exwalk::Result<()> {
    // Two right jumps in a row switch the bias from 1/2 to 4/5.
    let pair = ThresholdLadder::single(2, 2, 0.5, 0.8)?;
    println!("N=2, M=2, p=(0.5, 0.8): speed {:.15} (closed form 3/11 = {:.15})", speed_multi(&pair)?.speed, 3.0 / 11.0);
    println!("consecutive-run oracle: {:.15}", speed_consecutive_oracle(2, 0.5, 0.8));

    let ladder = ThresholdLadder::new(30, vec![10, 20], vec![0.2, 0.5, 0.9])?;
    let b = speed_multi(&ladder)?;
    println!("\nN=30, M=(10, 20), p=(0.2, 0.5, 0.9): speed {:.15}", b.speed);
    println!("rational reference:                   {:.15}", speed_multi_rational(&ladder)?);
    println!("band  weight        mean j/N");
    for (i, (w, m)) in b.band_weights().iter().zip(&b.band_mean_fraction).enumerate() {
        println!("{i:>4}  {w:.10}  {m:.6}");
    }

    // The log-space evaluation stays finite far beyond where C(N, j) overflows.
    for n in [1_000u64, 100_000, 10_000_000] {
        let l = ThresholdLadder::single(n, n / 2, 0.5, 0.8)?;
        println!("N={n:>8}, M=N/2: speed {:.12}", speed_multi(&l)?.speed);
    }
    Ok(())
}
