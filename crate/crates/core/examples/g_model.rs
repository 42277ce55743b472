//! Walks whose jump law is a continuous function `G` of the right-jump fraction.
//!
//! ```bash
//! cargo run -p exwalk --example g_model
//! ```

use exwalk::asymptotics::{g_limit_speed, g_potential, GSpec};
use exwalk::exact::speed_g;

fn show(label: &str, g: &GSpec) -> exwalk::Result<()> {
    println!("{label}");
    match g_limit_speed(g) {
        Ok(lim) => {
            for fp in &lim.fixed_points {
                println!("  fixed point {:.10}  F = {:.10}  attracting: {}", fp.p, fp.potential, fp.attracting);
            }
            println!("  p* = {:.12}, limiting speed {:.12}", lim.p_star, lim.speed);
            for n in [100u64, 1_000, 10_000] {
                println!("  N = {n:>6}: s(N;G) = {:.12}", speed_g(n, g)?);
            }
        }
        Err(e) => println!("  {e}"),
    }
    Ok(())
}

fn main() -> exwalk::Result<()> {
    show("linear G, rho = (0.2, 0.6)", &GSpec::linear(0.2, 0.6)?)?;
    show("constant G = 0.3", &GSpec::constant(0.3)?)?;

    let symmetric = GSpec::table(vec![0.0, 0.3, 0.5, 0.7, 1.0], vec![0.1, 0.2, 0.5, 0.8, 0.9])?;
    show("symmetric S-shape (two equal maxima)", &symmetric)?;
    let tilted = GSpec::table(vec![0.0, 0.3, 0.5, 0.7, 1.0], vec![0.1, 0.2, 0.5, 0.85, 0.95])?;
    show("S-shape tilted upward", &tilted)?;

    println!("potential of the tilted S-shape:");
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        println!("  F({p:.1}) = {:+.6}", g_potential(&tilted, p)?);
    }
    Ok(())
}
