//! The single-threshold phase transition at the critical fraction `r*`.
//!
//! ```bash
//! cargo run -p exwalk --example phase_transition
//! ```

use exwalk::asymptotics::{limit_speed_single, limit_speed_single_boundary, r_star, Alpha};
use exwalk::exact::speed_single;

fn main() -> exwalk::Result<()> {
    let (p0, p1) = (0.5, 0.8);
    let rs = r_star(p0, p1)?;
    println!("r*({p0}, {p1}) = {rs:.12}\n");

    println!("   r     N=250     N=1000    N=4000    limit");
    for k in 0..=20 {
        let r = k as f64 / 20.0;
        let at = |n: u64| speed_single(n, ((r * n as f64).round() as u64).clamp(1, n), p0, p1).map(|b| b.speed);
        let limit = limit_speed_single(p0, p1, r).map_or("tie".to_string(), |s| format!("{s:.4}"));
        println!("{r:5.2}  {:8.4}  {:8.4}  {:8.4}  {limit:>7}", at(250)?, at(1000)?, at(4000)?);
    }

    println!("\nAt r = r* the limit depends on how M/N approaches it:");
    for alpha in [Alpha::Finite(0.0), Alpha::Finite(0.1), Alpha::Finite(1.0), Alpha::Finite(10.0), Alpha::Infinite] {
        println!("  alpha = {alpha:?}: {:.6}", limit_speed_single_boundary(p0, p1, alpha)?);
    }
    Ok(())
}
