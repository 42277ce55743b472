//! Parameter sweeps over one or two axes, written as CSV.

use rayon::prelude::*;

use super::config::RunConfig;
use super::format::num;
use crate::asymptotics::{limit_speed_multi, LimitSpec};
use crate::error::{Error, Result};
use crate::exact::speed_multi;
use crate::model::ThresholdLadder;

/// Which parameter an axis moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Window,
    /// `M_k`, 1-based like the ladder.
    Threshold(usize),
    /// `r_k`, 1-based.
    Fraction(usize),
    /// `p_k`, 0-based.
    Prob(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub target: Target,
    pub values: Vec<f64>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_target(name: &str) -> Result<Target> {
    let index = |rest: &str, default: usize| -> Result<usize> {
        if rest.is_empty() {
            return Ok(default);
        }
        rest.parse().map_err(|_| usage(format!("unknown sweep parameter '{name}'")))
    };
    let target = match name {
        "N" => Target::Window,
        _ if name.starts_with('M') => Target::Threshold(index(&name[1..], 1)?),
        _ if name.starts_with('r') => Target::Fraction(index(&name[1..], 1)?),
        _ if name.starts_with('p') && name.len() > 1 => Target::Prob(index(&name[1..], 0)?),
        _ => return Err(usage(format!("unknown sweep parameter '{name}'"))),
    };
    if matches!(target, Target::Threshold(0) | Target::Fraction(0)) {
        return Err(usage(format!("thresholds are numbered from 1, got '{name}'")));
    }
    Ok(target)
}

impl std::str::FromStr for Axis {
    type Err = Error;

    /// `name=from:to:count[:log]` or `name=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, range) = s.split_once('=').ok_or_else(|| usage(format!("axis '{s}' lacks '='")))?;
        let name = name.trim();
        let target = parse_target(name)?;
        // generated points on integer axes snap to the nearest integer
        let integral = matches!(target, Target::Window | Target::Threshold(_));
        let number = |t: &str| t.trim().parse::<f64>().map_err(|_| usage(format!("axis '{s}': '{t}' is not a number")));
        let values = if range.contains(':') {
            let parts: Vec<&str> = range.split(':').collect();
            let log = match parts.get(3).map(|t| t.trim()) {
                None => false,
                Some("log") => true,
                Some(other) => return Err(usage(format!("axis '{s}': unknown spacing '{other}'"))),
            };
            if !(3..=4).contains(&parts.len()) {
                return Err(usage(format!("axis '{s}' must be from:to:count[:log]")));
            }
            let (from, to) = (number(parts[0])?, number(parts[1])?);
            let count: usize =
                parts[2].trim().parse().map_err(|_| usage(format!("axis '{s}': bad count '{}'", parts[2])))?;
            if count < 2 {
                return Err(usage(format!("axis '{s}' needs a count of at least 2")));
            }
            if from == to {
                return Err(usage(format!("axis '{s}' has an empty range")));
            }
            if log && (from <= 0.0 || to <= 0.0) {
                return Err(usage(format!("axis '{s}': log spacing needs positive bounds")));
            }
            (0..count)
                .map(|i| {
                    let t = i as f64 / (count - 1) as f64;
                    let x = if i == 0 {
                        from
                    } else if i == count - 1 {
                        to
                    } else if log {
                        (from.ln() + t * (to.ln() - from.ln())).exp()
                    } else {
                        from + t * (to - from)
                    };
                    if integral {
                        x.round()
                    } else {
                        x
                    }
                })
                .collect()
        } else {
            range.split(',').filter(|t| !t.trim().is_empty()).map(number).collect::<Result<Vec<_>>>()?
        };
        if values.is_empty() {
            return Err(usage(format!("axis '{s}' has no values")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(usage(format!("axis '{s}' has a non-finite value")));
        }
        if integral {
            if let Some(v) = values.iter().find(|v| v.fract() != 0.0 || **v < 0.0) {
                return Err(usage(format!("axis '{s}': {v} is not a whole number")));
            }
        }
        Ok(Axis { name: name.to_string(), target, values })
    }
}

/// One grid point's parameters before they become a ladder.
#[derive(Clone)]
struct Point {
    window: Option<u64>,
    thresholds: Option<Vec<u64>>,
    fractions: Option<Vec<f64>>,
    probs: Vec<f64>,
}

fn set_indexed<T: Copy>(v: &mut [T], k: usize, x: T, what: &str) -> Result<()> {
    let slot =
        v.get_mut(k).ok_or_else(|| usage(format!("sweep moves {what}{k}, which the base configuration lacks")))?;
    *slot = x;
    Ok(())
}

impl Point {
    fn apply(&mut self, target: Target, x: f64) -> Result<()> {
        // an axis may supply thresholds the base configuration leaves out
        let levels = self.probs.len().saturating_sub(1);
        match target {
            Target::Window => self.window = Some(x as u64),
            Target::Threshold(k) => {
                let m = self.thresholds.get_or_insert_with(|| vec![0; levels]);
                set_indexed(m, k - 1, x as u64, "M")?
            }
            Target::Fraction(k) => {
                let r = self.fractions.get_or_insert_with(|| vec![0.0; levels]);
                set_indexed(r, k - 1, x, "r")?
            }
            Target::Prob(k) => set_indexed(&mut self.probs, k, x, "p")?,
        }
        Ok(())
    }

    fn limit_spec(&self, cfg: &RunConfig, ladder: &ThresholdLadder) -> Result<LimitSpec> {
        match &self.fractions {
            Some(r) => fraction_spec(&self.probs, r, cfg),
            None => LimitSpec::from_ladder(ladder),
        }
    }

    fn ladder(&self, cfg: &RunConfig) -> Result<ThresholdLadder> {
        let n = self.window.ok_or_else(|| usage("missing --N"))?;
        match &self.fractions {
            Some(r) => fraction_spec(&self.probs, r, cfg)?.ladder_at(n),
            None => {
                let ladder = ThresholdLadder {
                    window: n,
                    thresholds: self.thresholds.clone().unwrap_or_default(),
                    probs: self.probs.clone(),
                    strictness: cfg.strictness(),
                };
                ladder.check()?;
                Ok(ladder)
            }
        }
    }
}

fn fraction_spec(probs: &[f64], fractions: &[f64], cfg: &RunConfig) -> Result<LimitSpec> {
    let spec = LimitSpec {
        probs: probs.to_vec(),
        fractions: fractions.to_vec(),
        offsets: None,
        period: None,
        strictness: cfg.strictness(),
    };
    spec.check()?;
    Ok(spec)
}

fn limit_cell(point: &Point, cfg: &RunConfig, ladder: &ThresholdLadder) -> Result<String> {
    match limit_speed_multi(&point.limit_spec(cfg, ladder)?) {
        Ok(report) => Ok(num(report.limit_speed)),
        // undetermined limits are left blank rather than aborting the sweep
        Err(e) if e.exit_code() == 3 => Ok(String::new()),
        Err(e) => Err(e),
    }
}

/// Evaluates the grid and renders it as CSV, rows in lexicographic axis order.
pub fn sweep_csv(cfg: &RunConfig, axes: &[Axis], with_limit: bool) -> Result<String> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(usage(format!("a sweep needs one or two axes, got {}", axes.len())));
    }
    if axes.len() == 2 && axes[0].target == axes[1].target {
        return Err(usage("both sweep axes move the same parameter"));
    }
    let uses_fractions = cfg.fractions.is_some() || axes.iter().any(|a| matches!(a.target, Target::Fraction(_)));
    let uses_thresholds = cfg.thresholds.is_some() || axes.iter().any(|a| matches!(a.target, Target::Threshold(_)));
    if uses_fractions && uses_thresholds {
        return Err(usage("give thresholds either as M or as fractions r, not both"));
    }
    let base = Point {
        window: cfg.single_window()?,
        thresholds: cfg.thresholds.clone(),
        fractions: cfg.fractions.clone(),
        probs: cfg.probs()?,
    };

    let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        grid = grid
            .into_iter()
            .flat_map(|prefix| axis.values.iter().map(move |&v| [prefix.clone(), vec![v]].concat()))
            .collect();
    }

    let rows = grid
        .par_iter()
        .map(|coords| {
            let mut point = base.clone();
            for (axis, &x) in axes.iter().zip(coords) {
                point.apply(axis.target, x)?;
            }
            let ladder = point.ladder(cfg)?;
            let mut row: Vec<String> = coords.iter().map(|&x| num(x)).collect();
            row.push(num(speed_multi(&ladder)?.speed));
            if with_limit {
                row.push(limit_cell(&point, cfg, &ladder)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
    header.push("speed_exact");
    if with_limit {
        header.push("speed_limit");
    }
    writer.write_record(&header)?;
    for row in rows {
        writer.write_record(&row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
