//! Walk configurations and the jump rule.
//!
//! A [`ThresholdLadder`] maps the number of rightward jumps among the last
//! `N` jumps (the *rights-count*) to the probability of the next jump going
//! right. Thresholds `M_1 < ... < M_l` split `0..=N` into `l + 1` bands;
//! band `i` covers `M_i <= k < M_{i+1}` with the sentinels `M_0 = 0` and
//! `M_{l+1} = N + 1`, and uses probability `p_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Probabilities must lie in `[PROB_EPSILON, 1 - PROB_EPSILON]` so that every
/// log-odds stays finite.
pub const PROB_EPSILON: f64 = 1e-12;

/// How strictly the band probabilities must increase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    /// `p_0 < p_1 < ... < p_l`.
    #[default]
    Strict,
    /// `p_0 <= p_1 <= ... <= p_l`; only for degenerate reference cases.
    Relaxed,
}

/// Window size, thresholds and band probabilities of an excited walk.
///
/// Serializes as `{"N": int, "M": [ints], "p": [floats]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdLadder {
    #[serde(rename = "N")]
    pub window: u64,
    #[serde(rename = "M")]
    pub thresholds: Vec<u64>,
    #[serde(rename = "p")]
    pub probs: Vec<f64>,
    #[serde(skip)]
    pub strictness: Strictness,
}

impl ThresholdLadder {
    /// Builds a strict ladder, failing with every violated invariant.
    pub fn new(window: u64, thresholds: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        let ladder = Self { window, thresholds, probs, strictness: Strictness::Strict };
        ladder.check()?;
        Ok(ladder)
    }

    pub fn relaxed(window: u64, thresholds: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        let ladder = Self { window, thresholds, probs, strictness: Strictness::Relaxed };
        ladder.check()?;
        Ok(ladder)
    }

    /// The single-threshold walk `(N, M; p0, p1)`.
    pub fn single(window: u64, threshold: u64, p0: f64, p1: f64) -> Result<Self> {
        Self::new(window, vec![threshold], vec![p0, p1])
    }

    /// A plain walk without thresholds.
    pub fn plain(window: u64, p: f64) -> Result<Self> {
        Self::new(window, Vec::new(), vec![p])
    }

    pub fn with_strictness(mut self, strictness: Strictness) -> Self {
        self.strictness = strictness;
        self
    }

    /// Number of thresholds `l`.
    pub fn levels(&self) -> usize {
        self.thresholds.len()
    }

    /// Number of bands, `l + 1`.
    pub fn bands(&self) -> usize {
        self.thresholds.len() + 1
    }

    /// `M_i` including the sentinels `M_0 = 0` and `M_{l+1} = N + 1`.
    pub fn threshold(&self, i: usize) -> u64 {
        if i == 0 {
            0
        } else if i <= self.thresholds.len() {
            self.thresholds[i - 1]
        } else {
            self.window + 1
        }
    }

    /// Rights-counts covered by band `i`, as a half-open range.
    pub fn band_range(&self, i: usize) -> std::ops::Range<u64> {
        self.threshold(i)..self.threshold(i + 1)
    }

    /// Band containing rights-count `k`. Assumes `k <= N`.
    pub fn band_of(&self, k: u64) -> usize {
        self.thresholds.partition_point(|&m| m <= k)
    }

    /// Every violated invariant; empty when the ladder is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.window;
        if n == 0 {
            out.push(Violation::new("N", None, "window must be at least 1"));
        }
        if self.probs.len() != self.thresholds.len() + 1 {
            out.push(Violation::new(
                "p",
                None,
                format!(
                    "expected {} probabilities for {} thresholds, got {}",
                    self.thresholds.len() + 1,
                    self.thresholds.len(),
                    self.probs.len()
                ),
            ));
        }
        for (i, &m) in self.thresholds.iter().enumerate() {
            if m < 1 || m > n {
                out.push(Violation::new("M", Some(i + 1), format!("threshold {m} must lie in [1, N={n}]")));
            }
        }
        for (i, w) in self.thresholds.windows(2).enumerate() {
            if w[1] <= w[0] {
                out.push(Violation::new("M", Some(i + 2), "M must be strictly increasing"));
            }
        }
        for (i, &p) in self.probs.iter().enumerate() {
            if !(PROB_EPSILON..=1.0 - PROB_EPSILON).contains(&p) {
                out.push(Violation::new(
                    "p",
                    Some(i),
                    format!("probability {p} must lie in [{PROB_EPSILON:e}, 1 - {PROB_EPSILON:e}]"),
                ));
            }
        }
        for (i, w) in self.probs.windows(2).enumerate() {
            let bad = match self.strictness {
                Strictness::Strict => w[1] <= w[0],
                Strictness::Relaxed => w[1] < w[0],
            };
            if bad {
                let msg = match self.strictness {
                    Strictness::Strict => "p must be strictly increasing",
                    Strictness::Relaxed => "p must be nondecreasing",
                };
                out.push(Violation::new("p", Some(i + 1), msg));
            }
        }
        out
    }

    /// [`validate`](Self::validate) as a `Result`.
    pub fn check(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(violations))
        }
    }

    /// Right-jump probability when `k` of the last `N` jumps went right.
    pub fn jump_probability(&self, k: u64) -> Result<f64> {
        if k > self.window {
            return Err(Error::Range { what: "rights-count", value: k as i128, lo: 0, hi: self.window as i128 });
        }
        Ok(self.probs[self.band_of(k)])
    }

    /// `log(p_i / (1 - p_i))` for every band.
    pub fn log_odds(&self) -> Vec<f64> {
        self.probs.iter().map(|&p| log_odds(p)).collect()
    }
}

pub(crate) fn log_odds(p: f64) -> f64 {
    p.ln() - (-p).ln_1p()
}

/// Position and last-`N`-jumps window of a running walk.
///
/// The window is a ring of packed bits (1 = rightward jump); the
/// rights-count is updated incrementally as the oldest jump is evicted.
#[derive(Debug, Clone)]
pub struct WalkState {
    position: i64,
    words: Vec<u64>,
    len: usize,
    head: usize,
    rights: u64,
}

impl WalkState {
    /// A walk at the origin whose window holds the given initial jumps, oldest first.
    pub fn from_jumps(jumps: &[bool]) -> Self {
        assert!(!jumps.is_empty(), "window must hold at least one jump");
        let len = jumps.len();
        let mut words = vec![0u64; len.div_ceil(64)];
        let mut position = 0i64;
        let mut rights = 0u64;
        for (i, &right) in jumps.iter().enumerate() {
            if right {
                words[i / 64] |= 1 << (i % 64);
                rights += 1;
                position += 1;
            } else {
                position -= 1;
            }
        }
        Self { position, words, len, head: 0, rights }
    }

    pub fn position(&self) -> i64 {
        self.position
    }

    pub fn rights_count(&self) -> u64 {
        self.rights
    }

    pub fn window_len(&self) -> usize {
        self.len
    }

    /// Jumps in the window, oldest first.
    pub fn window(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.bit((self.head + i) % self.len)).collect()
    }

    #[inline(always)]
    fn bit(&self, slot: usize) -> bool {
        (self.words[slot / 64] >> (slot % 64)) & 1 == 1
    }

    /// Appends a jump, evicting the oldest one.
    #[inline(always)]
    pub fn push(&mut self, right: bool) {
        let slot = self.head;
        let word = &mut self.words[slot / 64];
        let shift = slot % 64;
        let old = (*word >> shift) & 1;
        let new = right as u64;
        *word = (*word & !(1 << shift)) | (new << shift);
        self.rights = self.rights + new - old;
        self.position += 2 * new as i64 - 1;
        self.head += 1;
        if self.head == self.len {
            self.head = 0;
        }
    }

    /// Rights-count recomputed from the window bits.
    pub fn recount(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }
}
