use std::path::PathBuf;

use crate::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("probability {0} is outside the open interval (0, 1)")]
    InvalidProbability(Rational),

    #[error("{kind} node needs at least 2 children, got {got}")]
    Arity { kind: &'static str, got: usize },

    #[error("invalid pswitch set: {0}")]
    InvalidSet(String),

    #[error("unknown switch id {0}")]
    UnknownSwitch(usize),

    #[error("{what} exceeds the configured limit ({actual} > {limit})")]
    ResourceLimit {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("{value} is not of the form b/{q}^w for any w <= {cap}")]
    NotQAdic { value: Rational, q: u64, cap: u32 },

    #[error("residual {0} matches an available pswitch exactly")]
    ExactHit(Rational),

    #[error("no pswitch lowers d below {d} for residual {residual}")]
    NoProgress { residual: Rational, d: String },

    #[error("q = {0} is not supported here: {1}")]
    UnsupportedQ(u64, &'static str),

    #[error("synthesized circuit has {size} pswitches, above the bound {bound}")]
    BoundViolated { size: usize, bound: u64 },

    #[error("perturbation {0}")]
    Perturbation(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("cache file {path}: {message}")]
    Cache { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error comes from a configured size or work cap.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit { .. })
    }
}
