//! Monte Carlo simulation of the walk itself.
//!
//! Each replica owns its generator, seeded by [`rng::replica_seed`] from the
//! master seed, so results do not depend on how replicas are scheduled.
//! Replicas run on the current rayon pool and are reduced in index order.

pub mod rng;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{limit_speed_multi, LimitSpec};
use crate::error::{Error, Result};
use crate::model::{ThresholdLadder, WalkState};
pub use rng::{replica_seed, SplitMix64, RNG_ALGORITHM};

/// A single walk driven by a [`SplitMix64`] stream.
///
/// The first `N` jumps are independent with probability `p_0`; afterwards
/// the probability is looked up from the current rights-count.
pub struct Walker {
    state: WalkState,
    rng: SplitMix64,
    /// `bernoulli_threshold(p)` indexed by rights-count.
    thresholds: Vec<u64>,
    steps: u64,
}

impl Walker {
    pub fn new(ladder: &ThresholdLadder, seed: u64) -> Result<Self> {
        ladder.check()?;
        let mut rng = SplitMix64::new(seed);
        let t0 = rng::bernoulli_threshold(ladder.probs[0]);
        let initial: Vec<bool> = (0..ladder.window).map(|_| rng.next_u64() < t0).collect();
        let thresholds =
            (0..=ladder.window).map(|k| rng::bernoulli_threshold(ladder.probs[ladder.band_of(k)])).collect();
        Ok(Self { state: WalkState::from_jumps(&initial), rng, thresholds, steps: ladder.window })
    }

    /// Takes one excited step; returns whether it went right.
    #[inline(always)]
    pub fn step(&mut self) -> bool {
        let right = self.rng.next_u64() < self.thresholds[self.state.rights_count() as usize];
        self.state.push(right);
        self.steps += 1;
        debug_assert_eq!(self.state.rights_count(), self.state.recount());
        right
    }

    pub fn advance(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }

    pub fn position(&self) -> i64 {
        self.state.position()
    }

    /// Jumps taken so far, including the initial window.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn state(&self) -> &WalkState {
        &self.state
    }
}

/// Displacements of one or more replicas of the same walk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    /// Jumps per replica, including the initial `N`.
    pub steps: u64,
    /// Final position of each replica, in replica order.
    pub displacements: Vec<i64>,
    /// Mean of `displacement / steps` over replicas.
    pub empirical_speed: f64,
    /// Standard error of the mean; absent for a single replica.
    pub stderr: Option<f64>,
    pub seed: u64,
    pub rng: &'static str,
}

impl SimResult {
    pub fn replica_count(&self) -> usize {
        self.displacements.len()
    }

    fn from_displacements(steps: u64, displacements: Vec<i64>, seed: u64) -> Self {
        let speeds: Vec<f64> = displacements.iter().map(|&d| d as f64 / steps as f64).collect();
        let r = speeds.len() as f64;
        let mean = speeds.iter().sum::<f64>() / r;
        let stderr = (speeds.len() > 1).then(|| {
            let var = speeds.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (r - 1.0);
            (var / r).sqrt()
        });
        Self { steps, displacements, empirical_speed: mean, stderr, seed, rng: RNG_ALGORITHM }
    }
}

fn check_steps(ladder: &ThresholdLadder, steps: u64) -> Result<()> {
    if steps < ladder.window {
        return Err(Error::Domain(format!("need at least N = {} steps, got {steps}", ladder.window)));
    }
    Ok(())
}

fn displacement(ladder: &ThresholdLadder, steps: u64, seed: u64) -> Result<i64> {
    let mut walker = Walker::new(ladder, seed)?;
    walker.advance(steps - ladder.window);
    Ok(walker.position())
}

/// One replica of `steps` jumps seeded directly with `seed`.
pub fn run(ladder: &ThresholdLadder, steps: u64, seed: u64) -> Result<SimResult> {
    check_steps(ladder, steps)?;
    Ok(SimResult::from_displacements(steps, vec![displacement(ladder, steps, seed)?], seed))
}

/// `replicas` independent runs with seeds split from `seed`.
pub fn estimate_speed(ladder: &ThresholdLadder, steps: u64, replicas: usize, seed: u64) -> Result<SimResult> {
    ladder.check()?;
    check_steps(ladder, steps)?;
    if replicas < 2 {
        return Err(Error::Domain(format!("need at least 2 replicas, got {replicas}")));
    }
    let displacements = (0..replicas as u64)
        .into_par_iter()
        .map(|r| displacement(ladder, steps, replica_seed(seed, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimResult::from_displacements(steps, displacements, seed))
}

/// Pooled statistics of the increments that follow a burn-in period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementCensus {
    /// Increments recorded per replica.
    pub window: u64,
    /// Excited steps discarded after the initial `N`.
    pub burn_in: u64,
    pub replicas: usize,
    /// Band whose probability governs the limit.
    pub band: usize,
    pub expected: f64,
    pub frequency_plus: f64,
    pub z_score: f64,
    /// Counts of non-overlapping length-3 patterns; index bit 2 is the first
    /// increment, bit 0 the last, 1 = right.
    pub pattern_counts: [u64; 8],
    pub pattern_trials: u64,
}

impl IncrementCensus {
    /// Probability of pattern `idx` under independent `Ber(expected)` increments.
    pub fn pattern_expected(&self, idx: usize) -> f64 {
        let rights = (idx as u32).count_ones() as i32;
        self.expected.powi(rights) * (1.0 - self.expected).powi(3 - rights)
    }

    /// Standardized deviation of pattern `idx` from the product law.
    pub fn pattern_z(&self, idx: usize) -> f64 {
        let q = self.pattern_expected(idx);
        let n = self.pattern_trials as f64;
        let observed = self.pattern_counts[idx] as f64 / n;
        (observed - q) / (q * (1.0 - q) / n).sqrt()
    }
}

/// Runs `N + burn_in` steps per replica, then records the next `window` increments.
pub fn increment_census(
    ladder: &ThresholdLadder,
    burn_in: u64,
    window: u64,
    replicas: usize,
    seed: u64,
) -> Result<IncrementCensus> {
    if window == 0 || replicas == 0 {
        return Err(Error::Domain("census needs a positive window and at least one replica".into()));
    }
    let report = limit_speed_multi(&LimitSpec::from_ladder(ladder)?)?;
    if report.is_tie() {
        return Err(Error::Ambiguous(format!("bands {:?} tie; no single governing probability", report.argmax)));
    }
    let band = report.argmax[0];
    let expected = ladder.probs[band];

    let per_replica = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut walker = Walker::new(ladder, replica_seed(seed, r))?;
            walker.advance(burn_in);
            let mut plus = 0u64;
            let mut patterns = [0u64; 8];
            let mut current = 0usize;
            for i in 0..window {
                let right = walker.step();
                plus += right as u64;
                current = (current << 1) | right as usize;
                if i % 3 == 2 {
                    patterns[current & 7] += 1;
                    current = 0;
                }
            }
            Ok((plus, patterns))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut plus = 0u64;
    let mut pattern_counts = [0u64; 8];
    for (p, pats) in &per_replica {
        plus += p;
        for (acc, c) in pattern_counts.iter_mut().zip(pats) {
            *acc += c;
        }
    }
    let trials = window * replicas as u64;
    let frequency_plus = plus as f64 / trials as f64;
    let z_score = (frequency_plus - expected) / (expected * (1.0 - expected) / trials as f64).sqrt();
    Ok(IncrementCensus {
        window,
        burn_in,
        replicas,
        band,
        expected,
        frequency_plus,
        z_score,
        pattern_counts,
        pattern_trials: pattern_counts.iter().sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_steps() {
        let l = ThresholdLadder::single(5, 3, 0.3, 0.7).unwrap();
        assert!(matches!(run(&l, 4, 1), Err(Error::Domain(_))));
        assert!(run(&l, 5, 1).is_ok());
    }

    #[test]
    fn deterministic() {
        let l = ThresholdLadder::single(5, 3, 0.3, 0.7).unwrap();
        assert_eq!(run(&l, 10_000, 7).unwrap(), run(&l, 10_000, 7).unwrap());
        assert_ne!(run(&l, 10_000, 7).unwrap().displacements, run(&l, 10_000, 8).unwrap().displacements);
    }

    #[test]
    fn displacement_bounded_and_parity() {
        let l = ThresholdLadder::new(9, vec![3, 6], vec![0.2, 0.5, 0.85]).unwrap();
        for seed in 0..20 {
            let r = run(&l, 1001, seed).unwrap();
            let d = r.displacements[0];
            assert!(d.unsigned_abs() <= 1001);
            assert_eq!(d.rem_euclid(2), 1);
        }
    }

    #[test]
    fn symmetric_walk_clt_envelope() {
        let l = ThresholdLadder::relaxed(4, vec![2], vec![0.5, 0.5]).unwrap();
        let r = run(&l, 1_000_000, 3).unwrap();
        assert!(r.empirical_speed.abs() <= 4.0 / 1000.0);
        assert!(r.stderr.is_none());
    }

    #[test]
    fn replicas_use_distinct_streams() {
        let l = ThresholdLadder::single(5, 3, 0.3, 0.7).unwrap();
        let r = estimate_speed(&l, 2_000, 8, 11).unwrap();
        let mut d = r.displacements.clone();
        d.sort_unstable();
        d.dedup();
        assert!(d.len() > 1);
        assert_eq!(r.displacements[3], run(&l, 2_000, replica_seed(11, 3)).unwrap().displacements[0]);
    }

    #[test]
    fn needs_two_replicas() {
        let l = ThresholdLadder::single(5, 3, 0.3, 0.7).unwrap();
        assert!(estimate_speed(&l, 100, 1, 0).is_err());
    }

    #[test]
    fn census_flat_walk() {
        for burn_in in [0, 50, 5_000] {
            let l = ThresholdLadder::relaxed(10, vec![5], vec![0.35, 0.35]).unwrap();
            let c = increment_census(&l, burn_in, 999, 40, 5).unwrap();
            assert_eq!(c.expected, 0.35);
            assert!(c.z_score.abs() < 4.0, "{c:?}");
            assert_eq!(c.pattern_trials, 333 * 40);
        }
    }

    #[test]
    fn census_rejects_tie() {
        // r = 1/2 is critical for (0.3, 0.7)
        let l = ThresholdLadder::single(10, 5, 0.3, 0.7).unwrap();
        assert!(matches!(increment_census(&l, 10, 10, 2, 1), Err(Error::Ambiguous(_))));
    }
}
