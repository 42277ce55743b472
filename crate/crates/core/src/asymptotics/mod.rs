//! Behaviour as the window `N` grows with thresholds `M_k ≈ r_k N`.
//!
//! The stationary mass of band `i` grows like `(2 J_i)^N`; the band with
//! the largest `J_i` carries all the mass in the limit and the speed tends
//! to `2 p_i - 1` for that band. When several bands tie, integer offsets
//! `c_k = M_k - r_k N` decide the split through the `α` weights.
//!
//! `J_i` is kept with the common factor `1/2` on every index, so only
//! ratios of `J` values carry meaning.

mod gmodel;
mod quadrature;

pub use gmodel::{g_limit_speed, g_potential, FixedPoint, GLimit, GSpec};
pub use quadrature::adaptive_simpson;

use serde::Serialize;
use statrs::distribution::{Binomial, Discrete, DiscreteCDF};

use crate::error::{Error, Result, Violation};
use crate::model::{log_odds, Strictness, ThresholdLadder, PROB_EPSILON};
use crate::special::{ln_choose, log_sum_exp, xlogx};

/// Two log-`J` values closer than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// `|r - r*|` below this is a boundary case for [`limit_speed_single`].
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Cramér rate function of a fair-coin proportion: `log 2 + s log s + (1-s) log(1-s)`.
pub fn rate_function(s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("rate function needs s in [0, 1], got {s}")));
    }
    Ok(std::f64::consts::LN_2 + xlogx(s) + xlogx(1.0 - s))
}

fn check_pair(p0: f64, p1: f64) -> Result<()> {
    if !(p0 > 0.0 && p1 < 1.0 && p0 < p1) {
        return Err(Error::Domain(format!("need 0 < p0 < p1 < 1, got p0 = {p0}, p1 = {p1}")));
    }
    Ok(())
}

/// Critical threshold fraction separating the speeds `2p1-1` and `2p0-1`.
pub fn r_star(p0: f64, p1: f64) -> Result<f64> {
    check_pair(p0, p1)?;
    let num = (-p0).ln_1p() - (-p1).ln_1p();
    Ok(num / (log_odds(p1) - log_odds(p0)))
}

/// Limiting speed of the single-threshold walk with `M/N → r`.
///
/// Fails with [`Error::Ambiguous`] when `r` is within [`CRITICAL_TOLERANCE`]
/// of `r*`; that case is covered by [`limit_speed_single_boundary`].
pub fn limit_speed_single(p0: f64, p1: f64, r: f64) -> Result<f64> {
    let critical = r_star(p0, p1)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("threshold fraction must lie in [0, 1], got {r}")));
    }
    if (r - critical).abs() < CRITICAL_TOLERANCE {
        return Err(Error::Ambiguous(format!(
            "r = {r} is at the critical fraction r* = {critical}; supply the boundary weight alpha"
        )));
    }
    Ok(if r < critical { 2.0 * p1 - 1.0 } else { 2.0 * p0 - 1.0 })
}

/// Weight of a tied band in the limit; may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Alpha {
    Finite(f64),
    Infinite,
}

impl Alpha {
    pub fn is_infinite(self) -> bool {
        matches!(self, Alpha::Infinite)
    }
}

impl std::str::FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "Inf" | "Infinity" | "∞") {
            return Ok(Alpha::Infinite);
        }
        let v: f64 = t.parse().map_err(|_| Error::Usage(format!("invalid alpha '{s}'")))?;
        if v.is_infinite() && v > 0.0 {
            Ok(Alpha::Infinite)
        } else if v >= 0.0 {
            Ok(Alpha::Finite(v))
        } else {
            Err(Error::Domain(format!("alpha must be nonnegative, got {v}")))
        }
    }
}

/// Limiting speed at `M/N → r*` given the boundary weight `α`.
pub fn limit_speed_single_boundary(p0: f64, p1: f64, alpha: Alpha) -> Result<f64> {
    check_pair(p0, p1)?;
    match alpha {
        Alpha::Infinite => Ok(2.0 * p1 - 1.0),
        Alpha::Finite(a) if a >= 0.0 => {
            let (w0, w1) = (1.0 - p1, (1.0 - p0) * a);
            Ok(((2.0 * p0 - 1.0) * w0 + (2.0 * p1 - 1.0) * w1) / (w0 + w1))
        }
        Alpha::Finite(a) => Err(Error::Domain(format!("alpha must be nonnegative, got {a}"))),
    }
}

/// Limiting thresholds `r_k` and band probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSpec {
    pub probs: Vec<f64>,
    /// `r_1 <= ... <= r_l` in `[0, 1]`.
    pub fractions: Vec<f64>,
    /// Integer offsets `c_k = M_k - r_k N` along the subsequence `N ∈ period·ℕ`.
    pub offsets: Option<Vec<i64>>,
    /// Common denominator of the fractions when they are rational.
    pub period: Option<u64>,
    pub strictness: Strictness,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl LimitSpec {
    pub fn new(probs: Vec<f64>, fractions: Vec<f64>) -> Result<Self> {
        let spec = Self { probs, fractions, offsets: None, period: None, strictness: Strictness::Strict };
        spec.check()?;
        Ok(spec)
    }

    /// Rational fractions `num/den`; records their common denominator.
    pub fn from_rationals(probs: Vec<f64>, fractions: &[(u64, u64)], offsets: Option<Vec<i64>>) -> Result<Self> {
        let mut period = 1u64;
        for &(num, den) in fractions {
            if den == 0 || num > den {
                return Err(Error::Domain(format!("invalid fraction {num}/{den}")));
            }
            let g = gcd(num, den);
            let d = den / g;
            period = period / gcd(period, d) * d;
        }
        let spec = Self {
            probs,
            fractions: fractions.iter().map(|&(n, d)| n as f64 / d as f64).collect(),
            offsets,
            period: Some(period),
            strictness: Strictness::Strict,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn with_offsets(mut self, offsets: Vec<i64>) -> Result<Self> {
        self.offsets = Some(offsets);
        self.check()?;
        Ok(self)
    }

    pub fn with_strictness(mut self, strictness: Strictness) -> Self {
        self.strictness = strictness;
        self
    }

    /// Limit spec of a finite ladder: `r_k = M_k / N`.
    pub fn from_ladder(ladder: &ThresholdLadder) -> Result<Self> {
        ladder.check()?;
        let n = ladder.window;
        let g = ladder.thresholds.iter().fold(n, |acc, &m| gcd(acc, m));
        Ok(Self {
            probs: ladder.probs.clone(),
            fractions: ladder.thresholds.iter().map(|&m| m as f64 / n as f64).collect(),
            offsets: Some(vec![0; ladder.levels()]),
            period: Some(n / g),
            strictness: ladder.strictness,
        })
    }

    pub fn levels(&self) -> usize {
        self.fractions.len()
    }

    /// `r_i` with `r_0 = 0` and `r_{l+1} = 1`.
    pub fn fraction(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else if i <= self.fractions.len() {
            self.fractions[i - 1]
        } else {
            1.0
        }
    }

    /// `c_i` with `c_0 = 0`.
    fn offset(&self, i: usize) -> Option<i64> {
        if i == 0 {
            Some(0)
        } else {
            self.offsets.as_ref().map(|c| c[i - 1])
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.probs.len() != self.fractions.len() + 1 {
            out.push(Violation::new(
                "p",
                None,
                format!("expected {} probabilities for {} fractions", self.fractions.len() + 1, self.fractions.len()),
            ));
        }
        for (i, &r) in self.fractions.iter().enumerate() {
            if !(0.0..=1.0).contains(&r) {
                out.push(Violation::new("r", Some(i + 1), format!("fraction {r} must lie in [0, 1]")));
            }
        }
        for (i, w) in self.fractions.windows(2).enumerate() {
            if w[1] < w[0] {
                out.push(Violation::new("r", Some(i + 2), "r must be nondecreasing"));
            }
        }
        for (i, &p) in self.probs.iter().enumerate() {
            if !(PROB_EPSILON..=1.0 - PROB_EPSILON).contains(&p) {
                out.push(Violation::new("p", Some(i), format!("probability {p} out of range")));
            }
        }
        for (i, w) in self.probs.windows(2).enumerate() {
            let bad = match self.strictness {
                Strictness::Strict => w[1] <= w[0],
                Strictness::Relaxed => w[1] < w[0],
            };
            if bad {
                out.push(Violation::new("p", Some(i + 1), "p must be increasing"));
            }
        }
        if let Some(c) = &self.offsets {
            if c.len() != self.fractions.len() {
                out.push(Violation::new("offsets", None, "need one offset per fraction"));
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }

    /// Finite-`N` ladder with `M_k = round(r_k N) + c_k`, clamped to `[1, N]`.
    pub fn ladder_at(&self, n: u64) -> Result<ThresholdLadder> {
        self.check()?;
        let thresholds = (1..=self.levels())
            .map(|k| {
                let base = (self.fraction(k) * n as f64).round() as i64;
                (base + self.offset(k).unwrap_or(0)).clamp(1, n as i64) as u64
            })
            .collect();
        let ladder = ThresholdLadder { window: n, thresholds, probs: self.probs.clone(), strictness: self.strictness };
        ladder.check()?;
        Ok(ladder)
    }
}

/// Which supremum branch produced `J_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JBranch {
    /// `r_i <= p_i <= r_{i+1}`: the band contains its own mean.
    Interior,
    /// `r_i > p_i`: mass piles up at the lower edge.
    LowerEdge,
    /// `r_{i+1} < p_i`: mass piles up at the upper edge.
    UpperEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JValue {
    pub log_j: f64,
    pub branch: JBranch,
    /// `r_i < p_i < r_{i+1}` strictly.
    pub admissible: bool,
}

/// `log J_i` for every band, with the branch that applies.
pub fn j_values(spec: &LimitSpec) -> Result<Vec<JValue>> {
    spec.check()?;
    let l = spec.levels();
    let mut tilt = 0.0; // Σ_{k<=i} (r_k - r_{k-1}) log odds_{k-1}
    let mut out = Vec::with_capacity(l + 1);
    for i in 0..=l {
        let p = spec.probs[i];
        if i > 0 {
            tilt += (spec.fraction(i) - spec.fraction(i - 1)) * log_odds(spec.probs[i - 1]);
        }
        let (lo, hi) = (spec.fraction(i), spec.fraction(i + 1));
        let ln2 = std::f64::consts::LN_2;
        let (log_j, branch) = if lo > p {
            (-ln2 - xlogx(lo) - xlogx(1.0 - lo) + tilt, JBranch::LowerEdge)
        } else if hi < p {
            (-ln2 - xlogx(hi) - xlogx(1.0 - hi) + (hi - lo) * log_odds(p) + tilt, JBranch::UpperEdge)
        } else {
            (-ln2 - lo * p.ln() - (1.0 - lo) * (-p).ln_1p() + tilt, JBranch::Interior)
        };
        out.push(JValue { log_j, branch, admissible: lo < p && p < hi });
    }
    Ok(out)
}

/// Classification of the bands and the resulting limiting speed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TieReport {
    pub j: Vec<JValue>,
    pub admissible: Vec<usize>,
    /// Bands attaining the maximal `J` among admissible ones (within [`TIE_TOLERANCE`]).
    pub argmax: Vec<usize>,
    /// Bands attaining the maximal `J` over all indices.
    pub global_argmax: Vec<usize>,
    /// Tie weights, one per entry of `argmax`; empty without a tie.
    pub alphas: Vec<Alpha>,
    pub limit_speed: f64,
}

impl TieReport {
    pub fn is_tie(&self) -> bool {
        self.argmax.len() > 1
    }

    /// Whether every global maximizer is admissible.
    pub fn global_argmax_admissible(&self) -> bool {
        self.global_argmax.iter().all(|i| self.admissible.contains(i))
    }
}

fn argmax_within(j: &[JValue], indices: impl Iterator<Item = usize> + Clone) -> Vec<usize> {
    let best = indices.clone().map(|i| j[i].log_j).fold(f64::NEG_INFINITY, f64::max);
    indices.filter(|&i| best - j[i].log_j <= TIE_TOLERANCE).collect()
}

/// `α_i = odds_i^{-c_i} ∏_{k=1}^{i} odds_{k-1}^{c_k - c_{k-1}}` from integer offsets.
pub fn tie_alpha(spec: &LimitSpec, i: usize) -> Result<f64> {
    if spec.offsets.is_none() {
        return Err(Error::NeedsOffsets { tied: vec![i] });
    }
    let mut log_alpha = -(spec.offset(i).unwrap() as f64) * log_odds(spec.probs[i]);
    for k in 1..=i {
        let dc = spec.offset(k).unwrap() - spec.offset(k - 1).unwrap();
        log_alpha += dc as f64 * log_odds(spec.probs[k - 1]);
    }
    Ok(log_alpha.exp())
}

/// Limiting speed of the multi-threshold walk, resolving ties from the offsets.
pub fn limit_speed_multi(spec: &LimitSpec) -> Result<TieReport> {
    limit_speed_multi_with(spec, None)
}

/// Like [`limit_speed_multi`], but with tie weights given directly (one per band).
///
/// Explicit weights take precedence over offsets; at most one tied band may
/// be [`Alpha::Infinite`].
pub fn limit_speed_multi_with(spec: &LimitSpec, weights: Option<&[Alpha]>) -> Result<TieReport> {
    let j = j_values(spec)?;
    if let Some(w) = weights {
        if w.len() != j.len() {
            return Err(Error::Domain(format!("expected {} tie weights, got {}", j.len(), w.len())));
        }
    }
    let admissible: Vec<usize> = (0..j.len()).filter(|&i| j[i].admissible).collect();
    if admissible.is_empty() {
        // only possible when p_i sits exactly on a fraction
        return Err(Error::Ambiguous("no band satisfies r_i < p_i < r_{i+1}".into()));
    }
    let argmax = argmax_within(&j, admissible.iter().copied());
    let global_argmax = argmax_within(&j, 0..j.len());
    let probs = &spec.probs;
    if argmax.len() == 1 {
        let i0 = argmax[0];
        return Ok(TieReport {
            j,
            admissible,
            argmax,
            global_argmax,
            alphas: Vec::new(),
            limit_speed: 2.0 * probs[i0] - 1.0,
        });
    }
    let alphas: Vec<Alpha> = match weights {
        Some(w) => argmax.iter().map(|&i| w[i]).collect(),
        None => {
            if spec.offsets.is_none() {
                return Err(Error::NeedsOffsets { tied: argmax });
            }
            argmax.iter().map(|&i| tie_alpha(spec, i).map(Alpha::Finite)).collect::<Result<_>>()?
        }
    };
    let infinite: Vec<usize> = argmax.iter().zip(&alphas).filter(|(_, a)| a.is_infinite()).map(|(&i, _)| i).collect();
    let limit_speed = match infinite.len() {
        0 => {
            let mut num = 0.0;
            let mut den = 0.0;
            for (&i, a) in argmax.iter().zip(&alphas) {
                let Alpha::Finite(a) = *a else { unreachable!() };
                let w = a / (1.0 - probs[i]);
                num += w * (2.0 * probs[i] - 1.0);
                den += w;
            }
            if den <= 0.0 {
                return Err(Error::Domain("all tie weights are zero".into()));
            }
            num / den
        }
        1 => 2.0 * probs[infinite[0]] - 1.0,
        _ => return Err(Error::UnsupportedRefinement { infinite }),
    };
    Ok(TieReport { j, admissible, argmax, global_argmax, alphas, limit_speed })
}

/// Both sides of the exponential-tilting identity
/// `Σ_{j=M}^{M'-1} C(N,j) odds^{j-M} = odds^{-M} (1-p)^{-N} P(M <= Bin(N,p) <= M'-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowSum {
    /// Log of the left side, summed term by term.
    pub direct_log: f64,
    /// Log of the right side, with the binomial probability from its CDF.
    pub tilted_log: f64,
}

impl WindowSum {
    pub fn relative_gap(&self) -> f64 {
        (self.direct_log - self.tilted_log).exp_m1().abs()
    }
}

/// Window probabilities below this are summed term by term instead of read off the CDF.
const TAIL_UNDERFLOW: f64 = 1e-280;

/// Log of `P(lo <= Bin(n, p) <= hi)`, choosing the tail that avoids cancellation.
fn log_binomial_window(n: u64, p: f64, lo: u64, hi: u64) -> Result<f64> {
    let dist = Binomial::new(p, n).map_err(|e| Error::Domain(e.to_string()))?;
    let below_hi = dist.cdf(hi);
    let below_lo = if lo == 0 { 0.0 } else { dist.cdf(lo - 1) };
    let above_lo = if lo == 0 { 1.0 } else { dist.sf(lo - 1) };
    let above_hi = dist.sf(hi);
    // whichever side of the mean the window sits on, subtract the smaller tails
    let prob = if below_hi <= above_lo { below_hi - below_lo } else { above_lo - above_hi };
    if prob > TAIL_UNDERFLOW {
        return Ok(prob.ln());
    }
    // deep in a tail the CDF loses all relative accuracy; sum the pmf in log space
    let terms: Vec<f64> = (lo..=hi).map(|j| dist.ln_pmf(j)).collect();
    Ok(log_sum_exp(&terms))
}

/// Evaluates the tilting identity both ways.
pub fn binomial_window_sum(n: u64, p: f64, m: u64, m_next: u64) -> Result<WindowSum> {
    if !(m < m_next && m_next <= n + 1) {
        return Err(Error::Domain(format!("need 0 <= M < M' <= N + 1, got M = {m}, M' = {m_next}, N = {n}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("need 0 < p < 1, got {p}")));
    }
    let lo = log_odds(p);
    let terms: Vec<f64> = (m..m_next).map(|j| ln_choose(n, j) + (j - m) as f64 * lo).collect();
    let direct_log = log_sum_exp(&terms);
    let tilted_log = -(m as f64) * lo - n as f64 * (-p).ln_1p() + log_binomial_window(n, p, m, m_next - 1)?;
    Ok(WindowSum { direct_log, tilted_log })
}

/// Bisection for a sign change of `f` on `[a, b]`, to interval width `tol`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Domain(format!("no sign change on [{a}, {b}]")));
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
