use std::fmt;

use thiserror::Error;

/// A single broken invariant of a walk or limit configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    /// Offending index, when the invariant is about one element.
    pub index: Option<usize>,
    pub message: String,
}

impl Violation {
    pub(crate) fn new(field: &'static str, index: Option<usize>, message: impl Into<String>) -> Self {
        Self { field, index, message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}[{}]: {}", self.field, i, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("{what} = {value} is out of range [{lo}, {hi}]")]
    Range { what: &'static str, value: i128, lo: i128, hi: i128 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    Convergence { iterations: usize, last_change: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} on [{a}, {b}]")]
    Tolerance { tolerance: f64, a: f64, b: f64 },

    /// The limit is not determined by the leading-order data; see the payload.
    #[error("ambiguous: {0}")]
    Ambiguous(String),

    #[error("bands {tied:?} tie for the maximal growth rate; integer offsets are required to resolve the limit")]
    NeedsOffsets { tied: Vec<usize> },

    #[error("more than one tied band has infinite weight ({infinite:?}); refinement is not supported")]
    UnsupportedRefinement { infinite: Vec<usize> },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Ambiguous(_) | Error::NeedsOffsets { .. } | Error::UnsupportedRefinement { .. } => 3,
            Error::Capacity(_) => 4,
            Error::Convergence { .. } | Error::Tolerance { .. } | Error::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
