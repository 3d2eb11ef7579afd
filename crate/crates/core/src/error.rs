use std::path::PathBuf;

use thiserror::Error;

/// Failure while evaluating an expression at a single point.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("value exceeds the extended exponent range")]
    RangeOverflow,
    #[error("logarithm of zero")]
    LogOfZero,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("non-integer exponent at byte {offset}")]
    NonIntegerExponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::NonIntegerExponent { offset } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("evaluation failed on |z| = {r} at theta = {theta}: {source}")]
    OnCircle {
        r: f64,
        theta: f64,
        source: EvalError,
    },
    #[error("quadrature did not converge at r = {r}; worst subinterval [{lo}, {hi}]")]
    Quadrature { r: f64, lo: f64, hi: f64 },
    #[error("contour |z| = {r} too close to a zero (distance from integer {residual:e})")]
    ContourTooClose { r: f64, residual: f64 },
    #[error("{kind}: only {found} usable envelope points (need 3)")]
    TooFewPoints { kind: &'static str, found: usize },
    #[error("pole inside |z| <= {r}; meromorphic characteristic unsupported")]
    UnsupportedMeromorphic { r: f64 },
    #[error("theta = {theta} lies on a zero ray of the indicator (delta = {delta:e})")]
    ZeroRay { theta: f64, delta: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
