use alloc::string::String;

use crate::exactnum::Rational;
use crate::machine::BitString;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("negative base {0} has no real power")]
    NegativeBase(Rational),
    #[error("exponent must be positive, got {0}")]
    NonPositiveExponent(Rational),
    #[error("precision must be at least one bit")]
    ZeroPrecision,
    #[error("temperature {0} is outside (0, 1]")]
    TemperatureOutOfRange(Rational),
    #[error("temperature {0} exceeds 1 and the generalized halting probability diverges")]
    DivergentParameter(Rational),
    #[error("sequence is not strictly increasing at index {index}")]
    NotIncreasing { index: usize },
    #[error("sequence has {available} terms but index {requested} was requested")]
    Exhausted { requested: usize, available: usize },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("program {prefix} is a prefix of program {extension}")]
    PrefixViolation {
        prefix: BitString,
        extension: BitString,
    },
    #[error("Kraft sum {0} exceeds 1")]
    KraftExceeded(Rational),
    #[error("term {index} is not positive: increment {increment} does not exceed {demand}")]
    NotPositive {
        index: usize,
        increment: Rational,
        demand: Rational,
    },
    #[error("missing evidence: {0}")]
    MissingEvidence(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
