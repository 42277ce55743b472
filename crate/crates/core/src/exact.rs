//! Closed-form speeds at finite window size.
//!
//! Every evaluation here is a weighted average of `2j/N - 1` over the
//! rights-count `j`, with weights proportional to the stationary mass of
//! the level set `{#+ = j}`. Weights are accumulated in log-space with a
//! streaming max so that windows of order `10^8` do not overflow; the
//! signed numerator is never formed in log-space, only the two positive
//! sums `Σ w_j` and `Σ j·w_j`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::asymptotics::GSpec;
use crate::error::{Error, Result};
use crate::model::{log_odds, Strictness, ThresholdLadder};
use crate::special::{LnChooseRow, LogMoments};

/// Largest window accepted by the log-space evaluators.
pub const MAX_EXACT_WINDOW: u64 = 100_000_000;

/// Largest window accepted by [`speed_multi_rational`].
pub const MAX_RATIONAL_WINDOW: u64 = 64;

/// Speed together with the per-band decomposition that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedBreakdown {
    pub speed: f64,
    /// Log of band `i`'s unnormalized mass
    /// `(1/(1-p_i)) ∏_k odds_{k-1}^{M_k - M_{k-1}} Σ_j C(N,j) odds_i^{j - M_i}`.
    pub band_log_masses: Vec<f64>,
    /// Mass-weighted mean of `j/N` within band `i`.
    pub band_mean_fraction: Vec<f64>,
}

impl SpeedBreakdown {
    /// Normalized band masses.
    pub fn band_weights(&self) -> Vec<f64> {
        let total = crate::special::log_sum_exp(&self.band_log_masses);
        self.band_log_masses.iter().map(|m| (m - total).exp()).collect()
    }
}

fn check_capacity(n: u64) -> Result<()> {
    if n > MAX_EXACT_WINDOW {
        return Err(Error::Capacity(format!("window N = {n} exceeds {MAX_EXACT_WINDOW}")));
    }
    Ok(())
}

/// Log of the per-band prefactor `(1/(1-p_i)) ∏_{k=1}^{i} odds_{k-1}^{M_k - M_{k-1}}`.
pub(crate) fn band_prefactors(ladder: &ThresholdLadder) -> Vec<f64> {
    let odds = ladder.log_odds();
    let mut acc = 0.0;
    (0..ladder.bands())
        .map(|i| {
            if i > 0 {
                acc += (ladder.threshold(i) - ladder.threshold(i - 1)) as f64 * odds[i - 1];
            }
            acc - (-ladder.probs[i]).ln_1p()
        })
        .collect()
}

/// Speed of the multi-threshold walk.
pub fn speed_multi(ladder: &ThresholdLadder) -> Result<SpeedBreakdown> {
    ladder.check()?;
    let n = ladder.window;
    check_capacity(n)?;
    let odds = ladder.log_odds();
    let prefix = band_prefactors(ladder);
    let mut row = LnChooseRow::new(n);
    let mut total = LogMoments::default();
    let mut log_masses = Vec::with_capacity(ladder.bands());
    let mut means = Vec::with_capacity(ladder.bands());
    for i in 0..ladder.bands() {
        let start = ladder.threshold(i);
        let mut band = LogMoments::default();
        for _ in ladder.band_range(i) {
            let (j, ln_c) = row.advance();
            band.push(prefix[i] + ln_c + (j - start) as f64 * odds[i], j as f64);
        }
        log_masses.push(band.log_total());
        means.push(band.mean() / n as f64);
        total.push(band.log_total(), band.mean());
    }
    let speed = (2.0 * total.mean() / n as f64 - 1.0).clamp(-1.0, 1.0);
    Ok(SpeedBreakdown { speed, band_log_masses: log_masses, band_mean_fraction: means })
}

/// Speed of the single-threshold walk `(N, M; p0, p1)`.
///
/// `p0 == p1` is accepted (as a relaxed ladder).
pub fn speed_single(n: u64, m: u64, p0: f64, p1: f64) -> Result<SpeedBreakdown> {
    let strictness = if p0 == p1 { Strictness::Relaxed } else { Strictness::Strict };
    let ladder = ThresholdLadder { window: n, thresholds: vec![m], probs: vec![p0, p1], strictness };
    speed_multi(&ladder)
}

/// `s(N, N; p0, p1)`: speed when only `N` consecutive right jumps excite the walk.
pub fn speed_consecutive_oracle(n: u64, p0: f64, p1: f64) -> f64 {
    let p0n = if n <= i32::MAX as u64 { p0.powi(n as i32) } else { p0.powf(n as f64) };
    let a = p0n * (p1 - p0);
    (a + (1.0 - p1) * (2.0 * p0 - 1.0)) / (a + 1.0 - p1)
}

/// Speed of the `N`-threshold walk with `p_i = G(i/N)`.
pub fn speed_g(n: u64, g: &GSpec) -> Result<f64> {
    g.check()?;
    if n == 0 {
        return Err(Error::Domain("window N must be at least 1".into()));
    }
    check_capacity(n)?;
    let nf = n as f64;
    let mut row = LnChooseRow::new(n);
    let mut total = LogMoments::default();
    // Σ_{j<i} logit G(j/N)
    let mut log_f = 0.0;
    for i in 0..=n {
        let gi = g.eval(i as f64 / nf);
        let (_, ln_c) = row.advance();
        total.push(ln_c + log_f - (-gi).ln_1p(), i as f64);
        log_f += log_odds(gi);
    }
    Ok((2.0 * total.mean() / nf - 1.0).clamp(-1.0, 1.0))
}

fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
}

/// Speed evaluated in exact rational arithmetic from the binary values of `p_i`.
///
/// Reference path for small windows; the result is rounded once at the end.
pub fn speed_multi_rational(ladder: &ThresholdLadder) -> Result<f64> {
    ladder.check()?;
    let n = ladder.window;
    if n > MAX_RATIONAL_WINDOW {
        return Err(Error::Capacity(format!("rational evaluation limited to N <= {MAX_RATIONAL_WINDOW}")));
    }
    let one = BigRational::one();
    let probs = ladder.probs.iter().map(|&p| exact(p)).collect::<Result<Vec<_>>>()?;
    let odds: Vec<BigRational> = probs.iter().map(|p| p / (&one - p)).collect();

    // C(N, j) for all j
    let mut binom = vec![BigInt::one()];
    for j in 0..n {
        let next = binom[j as usize].clone() * BigInt::from(n - j) / BigInt::from(j + 1);
        binom.push(next);
    }

    let mut mass = BigRational::zero();
    let mut first_moment = BigRational::zero();
    let mut prefix = BigRational::one();
    for i in 0..ladder.bands() {
        if i > 0 {
            let steps = (ladder.threshold(i) - ladder.threshold(i - 1)) as usize;
            prefix *= num_traits::pow(odds[i - 1].clone(), steps);
        }
        let scale = &prefix / (&one - &probs[i]);
        let mut power = BigRational::one();
        for j in ladder.band_range(i) {
            let w = &scale * BigRational::from_integer(binom[j as usize].clone()) * &power;
            first_moment += &w * BigRational::from_integer(BigInt::from(j));
            mass += w;
            power *= &odds[i];
        }
    }
    let nr = BigRational::from_integer(BigInt::from(n));
    let numerator = BigRational::from_integer(BigInt::from(2)) * first_moment - &nr * &mass;
    let value = numerator / (nr * mass);
    value.to_f64().ok_or_else(|| Error::Domain("rational speed not representable".into()))
}
