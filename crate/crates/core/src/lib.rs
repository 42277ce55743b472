//! Speeds of random walks excited by their recent history.
//!
//! A walk on `ℤ` jumps by `±1`. Once `N` jumps have been made, the
//! probability of the next jump being to the right depends only on how many
//! of the last `N` jumps went right, through a [`ThresholdLadder`]. The
//! crate computes:
//!
//! - exact speeds at finite `N` ([`exact`]), cross-checked against the
//!   stationary distribution of the `2^N`-state window chain ([`chain`]);
//! - limiting speeds as `N → ∞` with `M_k/N → r_k`, including tie
//!   resolution and the `G`-response model ([`asymptotics`]);
//! - Monte Carlo estimates and post-burn-in increment statistics
//!   ([`simulate`]);
//! - a command-line front end with phase-diagram sweeps ([`cli`]).
//!
//! ```
//! use exwalk::{exact, ThresholdLadder};
//!
//! let ladder = ThresholdLadder::single(2, 2, 0.5, 0.8).unwrap();
//! let s = exact::speed_multi(&ladder).unwrap().speed;
//! assert!((s - 3.0 / 11.0).abs() < 1e-15);
//! ```

pub mod asymptotics;
pub mod chain;
pub mod cli;
pub mod error;
pub mod exact;
pub mod model;
pub mod simulate;
pub mod special;

pub use error::{Error, Result, Violation};
pub use model::{Strictness, ThresholdLadder, WalkState};
