//! The Markov chain of the last `N` jumps and its invariant measure.
//!
//! States are encoded as `N`-bit integers: bit `i` holds the `(i+1)`-th
//! oldest jump of the window (1 = right). A step drops bit 0 and appends the
//! new jump at bit `N-1`, so the successors of `v` are
//! `(v >> 1) | (b << (N-1))` for `b ∈ {0, 1}`.
//!
//! The invariant measure is constant on level sets of the rights-count, so
//! [`level_weights`] stores only the `N + 1` level values. The brute-force
//! solver works on the full `2^N`-state chain and is meant as an oracle for
//! small windows.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::band_prefactors;
use crate::model::ThresholdLadder;
use crate::special::{ln_choose, log_sum_exp};

/// Largest window for which [`FullStationary`] can be materialized.
pub const MAX_EXPAND_WINDOW: u64 = 24;

/// Stationary weights shared by all states with the same rights-count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelMeasure {
    pub window: u64,
    /// Unnormalized log-weight `log α_k` of a single state with `k` rights.
    pub log_alpha: Vec<f64>,
    /// Log of the normalizing constant: `μ(v) = exp(log_alpha[#+(v)] + log_c)`.
    pub log_c: f64,
}

impl LevelMeasure {
    /// Stationary probability of one state with rights-count `k`.
    pub fn state_probability(&self, k: u64) -> f64 {
        (self.log_alpha[k as usize] + self.log_c).exp()
    }

    /// Total stationary probability of the level set `{#+ = k}`.
    pub fn level_mass(&self, k: u64) -> f64 {
        (ln_choose(self.window, k) + self.log_alpha[k as usize] + self.log_c).exp()
    }

    /// Expands to one probability per state.
    pub fn expand(&self) -> Result<FullStationary> {
        if self.window > MAX_EXPAND_WINDOW {
            return Err(Error::Capacity(format!("cannot expand 2^{} states", self.window)));
        }
        let n = self.window as u32;
        let per_level: Vec<f64> = (0..=self.window).map(|k| self.state_probability(k)).collect();
        let probs = (0u32..1 << n).map(|v| per_level[v.count_ones() as usize]).collect();
        Ok(FullStationary { window: self.window, probs })
    }
}

/// A probability vector over all `2^N` window states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullStationary {
    pub window: u64,
    pub probs: Vec<f64>,
}

impl FullStationary {
    /// Largest `max - min` of the probabilities within a single level set.
    pub fn level_spread(&self) -> f64 {
        let mut lo = vec![f64::INFINITY; self.window as usize + 1];
        let mut hi = vec![f64::NEG_INFINITY; self.window as usize + 1];
        for (v, &p) in self.probs.iter().enumerate() {
            let k = (v as u32).count_ones() as usize;
            lo[k] = lo[k].min(p);
            hi[k] = hi[k].max(p);
        }
        lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max)
    }

    /// Mean probability of the states in each level set.
    pub fn level_means(&self) -> Vec<f64> {
        let n = self.window as usize;
        let mut sum = vec![0.0; n + 1];
        let mut count = vec![0usize; n + 1];
        for (v, &p) in self.probs.iter().enumerate() {
            let k = (v as u32).count_ones() as usize;
            sum[k] += p;
            count[k] += 1;
        }
        sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect()
    }
}

/// Invariant measure of the window chain, level by level.
pub fn level_weights(ladder: &ThresholdLadder) -> Result<LevelMeasure> {
    ladder.check()?;
    let n = ladder.window;
    let odds = ladder.log_odds();
    let prefix = band_prefactors(ladder);
    let mut log_alpha = Vec::with_capacity(n as usize + 1);
    for i in 0..ladder.bands() {
        let start = ladder.threshold(i);
        for k in ladder.band_range(i) {
            log_alpha.push(prefix[i] + (k - start) as f64 * odds[i]);
        }
    }
    let level_logs: Vec<f64> = log_alpha.iter().enumerate().map(|(k, a)| ln_choose(n, k as u64) + a).collect();
    let log_c = -log_sum_exp(&level_logs);
    Ok(LevelMeasure { window: n, log_alpha, log_c })
}

/// The two successors of state `v`: the right jump first, then the left jump.
pub fn transition_successors(ladder: &ThresholdLadder, v: u32) -> Result<[(u32, f64); 2]> {
    let n = ladder.window;
    if n == 0 || n > 31 {
        return Err(Error::Capacity(format!("state encoding supports 1 <= N <= 31, got {n}")));
    }
    if u64::from(v) >> n != 0 {
        return Err(Error::Range { what: "state", value: v as i128, lo: 0, hi: (1i128 << n) - 1 });
    }
    let p = ladder.jump_probability(u64::from(v.count_ones()))?;
    let shifted = v >> 1;
    let top = 1u32 << (n - 1);
    Ok([(shifted | top, p), (shifted, 1.0 - p)])
}

/// Solver settings for [`stationary_bruteforce_with`].
#[derive(Debug, Clone)]
pub struct BruteForceOptions {
    pub max_window: u64,
    /// Windows up to this size use a dense LU solve; larger ones use power iteration.
    pub dense_up_to: u64,
    /// Power iteration stops once `‖μ_{t+1} - μ_t‖₁` drops below this.
    pub step_tolerance: f64,
    pub max_iterations: usize,
    /// Iterate `½(I + A)` instead of `A`; same fixed point.
    pub lazy: bool,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self { max_window: 14, dense_up_to: 10, step_tolerance: 1e-14, max_iterations: 2_000_000, lazy: false }
    }
}

/// Result of the brute-force stationary solve.
#[derive(Debug, Clone)]
pub struct BruteForceSolution {
    pub measure: FullStationary,
    /// `‖μA - μ‖₁` of the returned vector.
    pub residual: f64,
    /// Power-iteration steps taken (0 for the dense path).
    pub iterations: usize,
}

fn transition_table(ladder: &ThresholdLadder) -> Vec<f64> {
    (0..=ladder.window).map(|k| ladder.probs[ladder.band_of(k)]).collect()
}

/// One application of the transition matrix: returns `μA`.
fn apply(ladder: &ThresholdLadder, right_prob: &[f64], mu: &[f64], out: &mut [f64]) {
    let top = 1usize << (ladder.window - 1);
    out.iter_mut().for_each(|x| *x = 0.0);
    for (v, &m) in mu.iter().enumerate() {
        let p = right_prob[(v as u32).count_ones() as usize];
        let s = v >> 1;
        out[s | top] += m * p;
        out[s] += m * (1.0 - p);
    }
}

/// `‖μA - μ‖₁` for an arbitrary vector over the `2^N` states.
pub fn stationarity_residual(ladder: &ThresholdLadder, mu: &[f64]) -> Result<f64> {
    ladder.check()?;
    if ladder.window > MAX_EXPAND_WINDOW || mu.len() != 1usize << ladder.window {
        return Err(Error::Domain(format!("expected a vector of length 2^{}", ladder.window)));
    }
    let table = transition_table(ladder);
    let mut next = vec![0.0; mu.len()];
    apply(ladder, &table, mu, &mut next);
    Ok(next.iter().zip(mu).map(|(a, b)| (a - b).abs()).sum())
}

/// Stationary distribution of the full chain with default solver settings.
pub fn stationary_bruteforce(ladder: &ThresholdLadder) -> Result<BruteForceSolution> {
    stationary_bruteforce_with(ladder, &BruteForceOptions::default())
}

pub fn stationary_bruteforce_with(ladder: &ThresholdLadder, opts: &BruteForceOptions) -> Result<BruteForceSolution> {
    ladder.check()?;
    let n = ladder.window;
    if n > opts.max_window || n > MAX_EXPAND_WINDOW {
        return Err(Error::Capacity(format!(
            "brute-force solve needs 2^{n} states; limit is N <= {}",
            opts.max_window
        )));
    }
    let table = transition_table(ladder);
    let (mut mu, iterations) =
        if n <= opts.dense_up_to { (dense_solve(ladder, &table)?, 0) } else { power_iterate(ladder, &table, opts)? };
    let total: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|x| *x /= total);
    let residual = stationarity_residual(ladder, &mu)?;
    Ok(BruteForceSolution { measure: FullStationary { window: n, probs: mu }, residual, iterations })
}

fn dense_solve(ladder: &ThresholdLadder, table: &[f64]) -> Result<Vec<f64>> {
    let size = 1usize << ladder.window;
    let top = size >> 1;
    // Rows of (A^T - I) are the balance equations; the last is replaced by Σμ = 1.
    let mut m = DMatrix::<f64>::zeros(size, size);
    for w in 0..size {
        let p = table[(w as u32).count_ones() as usize];
        let s = w >> 1;
        m[(s | top, w)] += p;
        m[(s, w)] += 1.0 - p;
        m[(w, w)] -= 1.0;
    }
    for c in 0..size {
        m[(size - 1, c)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(size);
    rhs[size - 1] = 1.0;
    let x = m.lu().solve(&rhs).ok_or_else(|| Error::Domain("singular balance system".into()))?;
    Ok(x.iter().map(|&v| v.max(0.0)).collect())
}

fn power_iterate(ladder: &ThresholdLadder, table: &[f64], opts: &BruteForceOptions) -> Result<(Vec<f64>, usize)> {
    let size = 1usize << ladder.window;
    let mut mu = vec![1.0 / size as f64; size];
    let mut next = vec![0.0; size];
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        apply(ladder, table, &mu, &mut next);
        if opts.lazy {
            next.iter_mut().zip(&mu).for_each(|(a, b)| *a = 0.5 * (*a + b));
        }
        change = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut mu, &mut next);
        if change <= opts.step_tolerance {
            return Ok((mu, it));
        }
    }
    Err(Error::Convergence { iterations: opts.max_iterations, last_change: change })
}

/// Speed as the stationary average of `2#+(v)/N - 1`, summed level by level.
pub fn ergodic_speed(ladder: &ThresholdLadder) -> Result<f64> {
    let levels = level_weights(ladder)?;
    let n = ladder.window;
    let mut mean = 0.0;
    let mut total = 0.0;
    for k in 0..=n {
        let mass = levels.level_mass(k);
        total += mass;
        mean += mass * (2.0 * k as f64 / n as f64 - 1.0);
    }
    Ok(mean / total)
}

/// Smallest `d` such that every state reaches every other state in at most
/// `d` steps along positive-probability transitions; `None` if the chain is
/// not irreducible.
pub fn max_hitting_depth(ladder: &ThresholdLadder) -> Result<Option<usize>> {
    ladder.check()?;
    let n = ladder.window;
    if n > 16 {
        return Err(Error::Capacity(format!("graph search limited to N <= 16, got {n}")));
    }
    let size = 1usize << n;
    let mut worst = 0;
    let mut depth = vec![usize::MAX; size];
    let mut queue = VecDeque::new();
    for source in 0..size {
        depth.iter_mut().for_each(|d| *d = usize::MAX);
        depth[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for (w, p) in transition_successors(ladder, v as u32)? {
                if p > 0.0 && depth[w as usize] == usize::MAX {
                    depth[w as usize] = depth[v] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        match depth.iter().copied().max() {
            Some(usize::MAX) | None => return Ok(None),
            Some(d) => worst = worst.max(d),
        }
    }
    Ok(Some(worst))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn successors_above_threshold() {
        let l = ThresholdLadder::single(2, 2, 0.3, 0.7).unwrap();
        // (+1,+1) = 0b11
        let s = transition_successors(&l, 0b11).unwrap();
        assert_eq!(s, [(0b11, 0.7), (0b01, 1.0 - 0.7)]);
    }

    #[test]
    fn successors_below_threshold() {
        let l = ThresholdLadder::single(2, 2, 0.3, 0.7).unwrap();
        // (-1,+1): oldest is -1 (bit 0 clear), newest +1 (bit 1 set)
        let s = transition_successors(&l, 0b10).unwrap();
        // new window (+1, ·): bit 0 = old newest = +1
        assert_eq!(s, [(0b11, 0.3), (0b01, 0.7)]);
    }

    #[test]
    fn successor_probabilities_sum_to_one() {
        let l = ThresholdLadder::new(6, vec![2, 4], vec![0.1, 0.45, 0.8]).unwrap();
        for v in 0..64 {
            let s = transition_successors(&l, v).unwrap();
            assert!((s[0].1 + s[1].1 - 1.0).abs() < 1e-15);
        }
        assert!(transition_successors(&l, 64).is_err());
    }

    #[test]
    fn boundary_ratio() {
        let l = ThresholdLadder::single(5, 3, 0.3, 0.7).unwrap();
        let w = level_weights(&l).unwrap();
        // α_3 / α_2 = p0 / (1 - p1) = 1
        assert!((w.log_alpha[3] - w.log_alpha[2]).abs() < 1e-15);
        // within band 0: ratio p0 / (1 - p0)
        assert!((w.log_alpha[2] - w.log_alpha[1] - (0.3f64 / 0.7).ln()).abs() < 1e-14);
        assert!((w.log_alpha[5] - w.log_alpha[4] - (0.7f64 / 0.3).ln()).abs() < 1e-14);
    }

    #[test]
    fn plain_walk_is_binomial_tilt() {
        let l = ThresholdLadder::plain(7, 0.35).unwrap();
        let w = level_weights(&l).unwrap();
        for k in 0..=7u64 {
            let expected = ln_choose(7, k).exp() * 0.35f64.powi(k as i32) * 0.65f64.powi(7 - k as i32);
            assert!((w.level_mass(k) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn merged_bands() {
        let l = ThresholdLadder::relaxed(6, vec![2, 4], vec![0.4, 0.4, 0.4]).unwrap();
        let w = level_weights(&l).unwrap();
        let r = (0.4f64 / 0.6).ln();
        for k in 0..6 {
            assert!((w.log_alpha[k + 1] - w.log_alpha[k] - r).abs() < 1e-14);
        }
    }

    #[test]
    fn normalization() {
        let l = ThresholdLadder::new(9, vec![3, 6], vec![0.2, 0.5, 0.9]).unwrap();
        let w = level_weights(&l).unwrap();
        let total: f64 = (0..=9).map(|k| w.level_mass(k)).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let full = w.expand().unwrap();
        assert!((full.probs.iter().sum::<f64>() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn bruteforce_matches_formula_small() {
        let l = ThresholdLadder::single(3, 2, 0.3, 0.7).unwrap();
        let sol = stationary_bruteforce(&l).unwrap();
        assert!(sol.residual <= 1e-12);
        assert!(sol.measure.level_spread() <= 1e-10);
        let formula = level_weights(&l).unwrap().expand().unwrap();
        for (a, b) in sol.measure.probs.iter().zip(&formula.probs) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn symmetric_walk_is_uniform() {
        let l = ThresholdLadder::plain(5, 0.5).unwrap();
        let sol = stationary_bruteforce(&l).unwrap();
        for &p in &sol.measure.probs {
            assert!((p - 1.0 / 32.0).abs() < 1e-14);
        }
    }

    #[test]
    fn power_iteration_path() {
        let l = ThresholdLadder::new(12, vec![5, 9], vec![0.3, 0.55, 0.75]).unwrap();
        let sol = stationary_bruteforce(&l).unwrap();
        assert!(sol.iterations > 0);
        assert!(sol.residual <= 1e-12, "{}", sol.residual);
        assert!(sol.measure.level_spread() <= 1e-10);
        let formula = level_weights(&l).unwrap();
        for (k, m) in sol.measure.level_means().iter().enumerate() {
            assert!((m - formula.state_probability(k as u64)).abs() <= 1e-10);
        }
    }

    #[test]
    fn lazy_power_iteration_same_fixed_point() {
        let l = ThresholdLadder::single(6, 3, 0.25, 0.65).unwrap();
        let opts = BruteForceOptions { dense_up_to: 0, lazy: true, ..Default::default() };
        let lazy = stationary_bruteforce_with(&l, &opts).unwrap();
        let formula = level_weights(&l).unwrap().expand().unwrap();
        for (a, b) in lazy.measure.probs.iter().zip(&formula.probs) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn capacity_limit() {
        let l = ThresholdLadder::single(15, 3, 0.3, 0.7).unwrap();
        assert!(matches!(stationary_bruteforce(&l), Err(Error::Capacity(_))));
    }

    #[test]
    fn ergodic_speed_trivial_cases() {
        let l = ThresholdLadder::plain(8, 0.5).unwrap();
        assert!(ergodic_speed(&l).unwrap().abs() < 1e-15);
        let l = ThresholdLadder::relaxed(8, vec![3], vec![0.65, 0.65]).unwrap();
        assert!((ergodic_speed(&l).unwrap() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn irreducible_within_two_windows() {
        for n in 1..=8u64 {
            let l = ThresholdLadder::single(n, n.div_ceil(2), 0.2, 0.9).unwrap();
            let d = max_hitting_depth(&l).unwrap().expect("irreducible");
            assert!(d <= 2 * n as usize, "N={n}: depth {d}");
        }
    }
}
