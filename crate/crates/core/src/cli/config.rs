//! The JSON run configuration and how command-line flags overlay it.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::asymptotics::Alpha;
use crate::error::{Error, Result};
use crate::model::{Strictness, ThresholdLadder};

/// Parameters shared by every subcommand.
///
/// A ladder file `{"N": 5, "M": [3], "p": [0.3, 0.7]}` is already a valid
/// config; the other keys are optional. Flags given on the command line
/// replace the matching key.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub window: Option<Sizes>,
    #[serde(rename = "M")]
    pub thresholds: Option<Vec<u64>>,
    #[serde(rename = "p")]
    pub probs: Option<Vec<f64>>,
    pub relaxed: Option<bool>,
    #[serde(rename = "r")]
    pub fractions: Option<Vec<f64>>,
    pub offsets: Option<Vec<i64>>,
    pub alpha: Option<Vec<Scalar>>,
    pub steps: Option<Count>,
    pub replicas: Option<usize>,
    pub seed: Option<u64>,
    pub census: Option<bool>,
    #[serde(rename = "T")]
    pub burn_in: Option<Count>,
    #[serde(rename = "m")]
    pub census_window: Option<Count>,
    pub linear: Option<[f64; 2]>,
    pub table: Option<PathBuf>,
    pub axes: Option<Vec<String>>,
    pub limit: Option<bool>,
    pub breakdown: Option<bool>,
    pub json: Option<bool>,
    pub output: Option<PathBuf>,
}

/// `"N"` is a single window for ladder commands and may be a list for `gmodel`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Sizes {
    One(u64),
    Many(Vec<u64>),
}

/// A JSON number or string; strings allow `"inf"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

/// A step count written as an integer, a float such as `1e7`, or a string.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Count {
    Int(u64),
    Float(f64),
}

impl Count {
    pub fn get(self) -> Result<u64> {
        match self {
            Count::Int(n) => Ok(n),
            Count::Float(x) => count_from_f64(x).map_err(Error::Usage),
        }
    }
}

fn count_from_f64(x: f64) -> std::result::Result<u64, String> {
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < 18_446_744_073_709_551_616.0 {
        Ok(x as u64)
    } else {
        Err(format!("'{x}' is not a nonnegative whole number"))
    }
}

/// Parses `10000000`, `1e7` or `2.5e6` as a count.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    count_from_f64(x)
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Usage(format!("invalid config {}: {e}", p.display())))
            }
        }
    }

    pub fn strictness(&self) -> Strictness {
        if self.relaxed.unwrap_or(false) {
            Strictness::Relaxed
        } else {
            Strictness::Strict
        }
    }

    pub fn single_window(&self) -> Result<Option<u64>> {
        match &self.window {
            None => Ok(None),
            Some(Sizes::One(n)) => Ok(Some(*n)),
            Some(Sizes::Many(_)) => Err(Error::Usage("N must be a single window here".into())),
        }
    }

    pub fn window_list(&self) -> Vec<u64> {
        match &self.window {
            None => Vec::new(),
            Some(Sizes::One(n)) => vec![*n],
            Some(Sizes::Many(v)) => v.clone(),
        }
    }

    pub fn probs(&self) -> Result<Vec<f64>> {
        self.probs.clone().ok_or_else(|| Error::Usage("missing --p".into()))
    }

    pub fn ladder(&self) -> Result<ThresholdLadder> {
        let n = self.single_window()?.ok_or_else(|| Error::Usage("missing --N".into()))?;
        let m = self.thresholds.clone().unwrap_or_default();
        let ladder = ThresholdLadder { window: n, thresholds: m, probs: self.probs()?, strictness: self.strictness() };
        ladder.check()?;
        Ok(ladder)
    }

    pub fn alphas(&self) -> Result<Option<Vec<Alpha>>> {
        let Some(list) = &self.alpha else { return Ok(None) };
        list.iter()
            .map(|s| match s {
                Scalar::Number(x) => Alpha::from_str(&x.to_string()),
                Scalar::Text(t) => Alpha::from_str(t),
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn count(field: Option<Count>, default: u64) -> Result<u64> {
        field.map_or(Ok(default), Count::get)
    }
}
