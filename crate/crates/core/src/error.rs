use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {}", join(.0))]
    Config(Vec<Violation>),

    #[error("simulation stalled at t = {0}: no enabled events and no pending control point")]
    Stalled(f64),

    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// One problem found by [`validate_spec`](crate::validate_spec).
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFiniteRate(&'static str),
    NegativeRate(&'static str),
    ZeroTotalRate,
    RateSumMismatch { expected: f64, actual: f64 },
    ProfileLength { expected: usize, actual: usize },
    PolicyTopologyMismatch(String),
    FractionOutOfRange { name: &'static str, value: f64 },
    EmptyPartialFanout { n: usize, q: f64 },
    NegativeSensingCoefficient(f64),
    LeafDirectRate(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFiniteRate(name) => write!(f, "rate {name} is not finite"),
            Violation::NegativeRate(name) => write!(f, "rate {name} is negative"),
            Violation::ZeroTotalRate => {
                write!(f, "total source-to-network rate lambda must be > 0")
            }
            Violation::RateSumMismatch { expected, actual } => write!(
                f,
                "rate sum mismatch: per-node rates sum to {actual}, expected {expected}"
            ),
            Violation::ProfileLength { expected, actual } => write!(
                f,
                "rate profile has {actual} entries, topology has {expected} nodes"
            ),
            Violation::PolicyTopologyMismatch(msg) => write!(f, "policy/topology mismatch: {msg}"),
            Violation::FractionOutOfRange { name, value } => {
                write!(f, "{name} = {value} is outside its allowed range")
            }
            Violation::EmptyPartialFanout { n, q } => write!(
                f,
                "partial fan-out floor(q(n-1)) is zero for n = {n}, q = {q}"
            ),
            Violation::NegativeSensingCoefficient(c) => {
                write!(f, "sensing coefficient C = {c} must be finite and >= 0")
            }
            Violation::LeafDirectRate(i) => {
                write!(
                    f,
                    "leaf node {i} has a direct source rate; leaves are fed by their head"
                )
            }
        }
    }
}
