//! Two non-adjacent bands tying for the maximal growth rate.
//!
//! With `p = (0.5, 0.8, p2)` and fractions `(133/200, 17/20)`, band 1 loses
//! while bands 0 and 2 tie once `p2` is tuned. The limiting speed is then a
//! weighted mixture fixed by the integer offsets of the thresholds.
//!
//! ```bash
//! cargo run -p exwalk --example tie_resolution
//! ```

use exwalk::asymptotics::{bisect, j_values, limit_speed_multi, LimitSpec};
use exwalk::exact::speed_multi;

fn spec(p2: f64, offsets: Vec<i64>) -> exwalk::Result<LimitSpec> {
    LimitSpec::from_rationals(vec![0.5, 0.8, p2], &[(133, 200), (17, 20)], Some(offsets))
}

fn main() -> exwalk::Result<()> {
    let p2 = bisect(
        |p2| {
            let j = j_values(&spec(p2, vec![0, 0]).unwrap()).unwrap();
            j[2].log_j - j[0].log_j
        },
        0.851,
        0.999,
        1e-12,
    )?;
    println!("p2 = {p2:.12}");

    for offsets in [vec![0, 0], vec![0, 3], vec![-2, -2]] {
        let s = spec(p2, offsets.clone())?;
        let report = limit_speed_multi(&s)?;
        let log_j: Vec<String> = report.j.iter().map(|j| format!("{:.6}", j.log_j)).collect();
        println!("\noffsets {offsets:?}: log J = [{}], argmax {:?}", log_j.join(", "), report.argmax);
        println!("  alphas {:?} -> limit {:.9}", report.alphas, report.limit_speed);
        for n in [1_000u64, 2_000, 10_000] {
            let speed = speed_multi(&s.ladder_at(n)?)?.speed;
            println!("  N = {n:>6}: exact {speed:.9}, gap {:.2e}", (speed - report.limit_speed).abs());
        }
    }
    Ok(())
}
