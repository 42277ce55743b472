//! Small log-space helpers shared by the exact and asymptotic code.

use statrs::function::gamma::ln_gamma;

/// `log C(n, k)`; `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 1000 {
        // exact-ish product form; avoids Lanczos error on small arguments
        return (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum();
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Iterates `log C(n, j)` for `j = 0, 1, ..., n` using the ratio recurrence.
pub(crate) struct LnChooseRow {
    n: u64,
    j: u64,
    value: f64,
}

impl LnChooseRow {
    pub(crate) fn new(n: u64) -> Self {
        Self { n, j: 0, value: 0.0 }
    }

    /// Current `(j, log C(n, j))`, then advances.
    #[inline]
    pub(crate) fn advance(&mut self) -> (u64, f64) {
        let out = (self.j, self.value);
        if self.j < self.n {
            self.value += ((self.n - self.j) as f64).ln() - ((self.j + 1) as f64).ln();
        }
        self.j += 1;
        out
    }
}

/// Streaming `log Σ w_j` together with `Σ j·w_j`, rescaled on every new maximum.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogMoments {
    max: f64,
    sum: f64,
    weighted: f64,
}

impl Default for LogMoments {
    fn default() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0, weighted: 0.0 }
    }
}

impl LogMoments {
    /// Adds a term with log-weight `log_w` and abscissa `x`.
    #[inline]
    pub(crate) fn push(&mut self, log_w: f64, x: f64) {
        if log_w == f64::NEG_INFINITY {
            return;
        }
        if log_w > self.max {
            let scale = (self.max - log_w).exp();
            self.sum = self.sum * scale + 1.0;
            self.weighted = self.weighted * scale + x;
            self.max = log_w;
        } else {
            let w = (log_w - self.max).exp();
            self.sum += w;
            self.weighted += w * x;
        }
    }

    /// `log Σ w_j`.
    pub(crate) fn log_total(&self) -> f64 {
        self.max + self.sum.ln()
    }

    /// `Σ j·w_j / Σ w_j`.
    pub(crate) fn mean(&self) -> f64 {
        self.weighted / self.sum
    }
}

/// `log Σ exp(x_i)`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `x log x` with `0 log 0 = 0`.
pub(crate) fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}
