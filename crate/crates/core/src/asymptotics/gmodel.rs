//! The `N`-threshold walk with `p_i = G(i/N)` and its variational limit.

use serde::{Deserialize, Serialize};

use super::bisect;
use super::quadrature::adaptive_simpson;
use crate::error::{Error, Result};
use crate::model::{log_odds, PROB_EPSILON};
use crate::special::xlogx;

/// Absolute tolerance for the `∫ logit G` quadrature.
pub const POTENTIAL_TOLERANCE: f64 = 1e-10;
/// Grid used to bracket fixed points of `G`.
pub const FIXED_POINT_GRID: usize = 10_000;
/// Bracket width at which fixed-point bisection stops.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;
/// Potential values closer than this count as a shared maximum.
pub const MAXIMUM_TOLERANCE: f64 = 1e-9;
/// Competing maxima named individually in the ambiguity message.
const LISTED_COMPETITORS: usize = 5;

/// A continuous nondecreasing response `G: [0,1] → (0,1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GSpec {
    /// `G(x) = ρ0 + (ρ1 - ρ0) x`: pick one of the last `N` jumps uniformly and
    /// jump right with probability `ρ1` if it was a right jump, `ρ0` otherwise.
    Linear { rho0: f64, rho1: f64 },
    /// Piecewise-linear interpolation; knots run from 0 to 1.
    Table { knots: Vec<f64>, values: Vec<f64> },
}

impl GSpec {
    pub fn linear(rho0: f64, rho1: f64) -> Result<Self> {
        let g = GSpec::Linear { rho0, rho1 };
        g.check()?;
        Ok(g)
    }

    pub fn constant(q: f64) -> Result<Self> {
        Self::linear(q, q)
    }

    pub fn table(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let g = GSpec::Table { knots, values };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        let in_range = |v: f64| (PROB_EPSILON..=1.0 - PROB_EPSILON).contains(&v);
        match self {
            GSpec::Linear { rho0, rho1 } => {
                if !(in_range(*rho0) && in_range(*rho1) && rho0 <= rho1) {
                    return Err(Error::Domain(format!("linear G needs 0 < rho0 <= rho1 < 1, got {rho0}, {rho1}")));
                }
            }
            GSpec::Table { knots, values } => {
                if knots.len() < 2 || knots.len() != values.len() {
                    return Err(Error::Domain("table G needs at least two knots and one value per knot".into()));
                }
                if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 {
                    return Err(Error::Domain("table G knots must start at 0 and end at 1".into()));
                }
                if knots.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Domain("table G knots must be strictly increasing".into()));
                }
                if values.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Domain("table G values must be nondecreasing".into()));
                }
                if let Some(v) = values.iter().find(|&&v| !in_range(v)) {
                    return Err(Error::Domain(format!("table G value {v} outside (0, 1)")));
                }
            }
        }
        Ok(())
    }

    /// `G(x)`, with `x` clamped to `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            GSpec::Linear { rho0, rho1 } => rho0 + (rho1 - rho0) * x,
            GSpec::Table { knots, values } => {
                let seg = knots.partition_point(|&k| k <= x).clamp(1, knots.len() - 1);
                let (x0, x1) = (knots[seg - 1], knots[seg]);
                let t = (x - x0) / (x1 - x0);
                values[seg - 1] + t * (values[seg] - values[seg - 1])
            }
        }
    }

    /// `∫_0^p log(G/(1-G))`.
    pub fn logit_integral(&self, p: f64) -> Result<f64> {
        let f = |x: f64| log_odds(self.eval(x));
        match self {
            GSpec::Linear { rho0, rho1 } => {
                let slope = rho1 - rho0;
                if slope < 1e-4 {
                    return adaptive_simpson(&f, 0.0, p, POTENTIAL_TOLERANCE);
                }
                let (a, c) = (*rho0, 1.0 - rho0);
                Ok((xlogx(a + slope * p) - xlogx(a) - xlogx(c) + xlogx(c - slope * p)) / slope)
            }
            GSpec::Table { knots, .. } => {
                let mut total = 0.0;
                let pieces = knots.windows(2).filter(|w| w[0] < p).count().max(1);
                for w in knots.windows(2) {
                    if w[0] >= p {
                        break;
                    }
                    total += adaptive_simpson(&f, w[0], w[1].min(p), POTENTIAL_TOLERANCE / pieces as f64)?;
                }
                Ok(total)
            }
        }
    }
}

/// `F(p) = ∫_0^p log(G/(1-G)) - p log p - (1-p) log(1-p)`.
pub fn g_potential(g: &GSpec, p: f64) -> Result<f64> {
    g.check()?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("potential needs p in [0, 1], got {p}")));
    }
    Ok(g.logit_integral(p)? - xlogx(p) - xlogx(1.0 - p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub p: f64,
    pub potential: f64,
    /// `G - x` changes sign from + to - here (a local maximum of the potential).
    pub attracting: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GLimit {
    pub fixed_points: Vec<FixedPoint>,
    pub p_star: f64,
    pub speed: f64,
}

/// Fixed points of `G`: closed form for linear `G`, otherwise bracketed on a
/// uniform grid and refined by bisection.
pub fn fixed_points(g: &GSpec) -> Result<Vec<FixedPoint>> {
    g.check()?;
    if let GSpec::Linear { rho0, rho1 } = *g {
        // slope below 1: exactly one root, and it attracts
        let p = rho0 / (1.0 - rho1 + rho0);
        return Ok(vec![FixedPoint { p, potential: g_potential(g, p)?, attracting: true }]);
    }
    let h = |x: f64| g.eval(x) - x;
    let step = 1.0 / FIXED_POINT_GRID as f64;
    let mut out = Vec::new();
    let mut prev_x = 0.0;
    let mut prev_h = h(0.0);
    for k in 1..=FIXED_POINT_GRID {
        let x = k as f64 * step;
        let hx = h(x);
        if hx == 0.0 {
            let next = h((x + step).min(1.0));
            out.push((x, prev_h > 0.0 && next < 0.0));
        } else if prev_h != 0.0 && prev_h.signum() != hx.signum() {
            let root = bisect(h, prev_x, x, FIXED_POINT_TOLERANCE)?;
            out.push((root, prev_h > 0.0));
        }
        prev_x = x;
        prev_h = hx;
    }
    out.into_iter().map(|(p, attracting)| Ok(FixedPoint { p, potential: g_potential(g, p)?, attracting })).collect()
}

/// Limiting speed `2p* - 1` where `p*` is the unique maximizer of the potential.
pub fn g_limit_speed(g: &GSpec) -> Result<GLimit> {
    let points = fixed_points(g)?;
    let best = points
        .iter()
        .copied()
        .max_by(|a, b| a.potential.total_cmp(&b.potential))
        .ok_or_else(|| Error::Domain("G has no fixed point".into()))?;
    let competing: Vec<&FixedPoint> =
        points.iter().filter(|fp| best.potential - fp.potential <= MAXIMUM_TOLERANCE).collect();
    if competing.len() > 1 {
        let describe = |fp: &&FixedPoint| format!("p = {} (F = {})", fp.p, fp.potential);
        let mut listed: Vec<String> = competing.iter().take(LISTED_COMPETITORS).map(describe).collect();
        if competing.len() > LISTED_COMPETITORS {
            // a flat stretch of G on the diagonal yields one root per grid point
            let last = competing[competing.len() - 1];
            listed.push(format!("... {} more up to {}", competing.len() - LISTED_COMPETITORS, describe(&last)));
        }
        return Err(Error::Ambiguous(format!("potential maximum is not unique: {}", listed.join(", "))));
    }
    let speed = match *g {
        // 2p* - 1 over a common denominator, exact for symmetric and constant G
        GSpec::Linear { rho0, rho1 } => (rho0 + rho1 - 1.0) / (1.0 - rho1 + rho0),
        GSpec::Table { .. } => 2.0 * best.p - 1.0,
    };
    Ok(GLimit { fixed_points: points, p_star: best.p, speed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fixed_point() {
        let g = GSpec::linear(0.2, 0.6).unwrap();
        let lim = g_limit_speed(&g).unwrap();
        assert!((lim.p_star - 1.0 / 3.0).abs() < 1e-15);
        assert!((lim.speed + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(lim.fixed_points.len(), 1);
        assert!((g.eval(lim.p_star) - lim.p_star).abs() <= 1e-10);
    }

    #[test]
    fn constant_g_limit() {
        let g = GSpec::constant(0.3).unwrap();
        let lim = g_limit_speed(&g).unwrap();
        assert_eq!(lim.speed, 2.0 * 0.3 - 1.0);
    }

    #[test]
    fn constant_potential_maximized_at_q() {
        let q = 0.3f64;
        let g = GSpec::constant(q).unwrap();
        let at = g_potential(&g, q).unwrap();
        for k in 1..100 {
            let p = k as f64 / 100.0;
            let f = g_potential(&g, p).unwrap();
            let closed = p * (q / (1.0 - q)).ln() - xlogx(p) - xlogx(1.0 - p);
            assert!((f - closed).abs() < 1e-10);
            assert!(f <= at + 1e-15);
        }
    }

    #[test]
    fn linear_closed_form_matches_quadrature() {
        let g = GSpec::linear(0.3, 0.7).unwrap();
        let f = |x: f64| log_odds(g.eval(x));
        for &p in &[0.0, 0.1, 0.5, 0.93, 1.0] {
            let q = adaptive_simpson(&f, 0.0, p, 1e-12).unwrap();
            assert!((g.logit_integral(p).unwrap() - q).abs() < 1e-10);
        }
    }

    #[test]
    fn potential_derivative_vanishes_at_fixed_point() {
        let g = GSpec::linear(0.3, 0.7).unwrap();
        let h = 1e-5;
        let d1 = (g_potential(&g, 0.5 + h).unwrap() - g_potential(&g, 0.5 - h).unwrap()) / (2.0 * h);
        assert!(d1.abs() < 1e-8);
        let d2 = (g_potential(&g, 0.5 + h).unwrap() - 2.0 * g_potential(&g, 0.5).unwrap()
            + g_potential(&g, 0.5 - h).unwrap())
            / (h * h);
        assert!(d2 < 0.0);
    }

    #[test]
    fn grid_search_finds_nonlinear_roots() {
        // S-shaped G symmetric about 1/2: roots 0.15, 0.5, 0.85 with equal outer potentials
        let g = GSpec::table(vec![0.0, 0.3, 0.5, 0.7, 1.0], vec![0.1, 0.2, 0.5, 0.8, 0.9]).unwrap();
        let pts = fixed_points(&g).unwrap();
        let ps: Vec<f64> = pts.iter().map(|fp| fp.p).collect();
        assert_eq!(ps.len(), 3, "{ps:?}");
        for (p, want) in ps.iter().zip([0.15, 0.5, 0.85]) {
            assert!((p - want).abs() < 1e-11);
        }
        assert_eq!(pts.iter().map(|fp| fp.attracting).collect::<Vec<_>>(), [true, false, true]);
        assert!(matches!(g_limit_speed(&g), Err(Error::Ambiguous(_))));
        // lifting the upper branch breaks the symmetry in favour of the right root
        let g = GSpec::table(vec![0.0, 0.3, 0.5, 0.7, 1.0], vec![0.1, 0.2, 0.5, 0.85, 0.95]).unwrap();
        let lim = g_limit_speed(&g).unwrap();
        assert!((lim.p_star - 0.925).abs() < 1e-11);
        assert!((g.eval(lim.p_star) - lim.p_star).abs() < 1e-11);
    }

    #[test]
    fn table_eval_interpolates() {
        let g = GSpec::table(vec![0.0, 0.5, 1.0], vec![0.2, 0.4, 0.9]).unwrap();
        assert!((g.eval(0.25) - 0.3).abs() < 1e-15);
        assert!((g.eval(0.75) - 0.65).abs() < 1e-15);
        assert_eq!(g.eval(1.0), 0.9);
        assert_eq!(g.eval(-1.0), 0.2);
    }

    #[test]
    fn table_validation() {
        assert!(GSpec::table(vec![0.0, 1.0], vec![0.6, 0.4]).is_err());
        assert!(GSpec::table(vec![0.1, 1.0], vec![0.4, 0.6]).is_err());
        assert!(GSpec::table(vec![0.0, 1.0], vec![0.0, 0.6]).is_err());
        assert!(GSpec::linear(0.7, 0.3).is_err());
    }

    #[test]
    fn flat_diagonal_is_ambiguous() {
        // G(x) = x on [0.3, 0.7]: a continuum of fixed points with equal potential
        let g = GSpec::table(vec![0.0, 0.3, 0.7, 1.0], vec![0.2, 0.3, 0.7, 0.8]).unwrap();
        assert!(matches!(g_limit_speed(&g), Err(Error::Ambiguous(_))));
    }
}
