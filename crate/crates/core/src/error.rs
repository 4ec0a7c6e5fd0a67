use thiserror::Error;

use crate::ivt::Value;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid base {0}: must be in 2..=255")]
    InvalidBase(u32),

    #[error("invalid arity {0}: must be at least 1")]
    InvalidArity(u32),

    #[error("digit {digit} is out of range for base {base}")]
    DigitOutOfRange { digit: u32, base: u32 },

    #[error("rule index {j} is out of range for base {base}, arity {arity} (must be < {limit})")]
    IndexOutOfRange {
        j: u64,
        base: u32,
        arity: u32,
        limit: u64,
    },

    #[error("rule space for base {base}, arity {arity} does not fit in 64 bits")]
    RuleSpaceTooLarge { base: u32, arity: u32 },

    #[error("rule table has {got} entries, expected {expected}")]
    TableLength { got: usize, expected: usize },

    #[error("expected {expected} operands, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("arithmetic overflow")]
    Overflow,

    #[error("empty digit string")]
    EmptyDigits,

    #[error("orbit from {start} did not settle on a cycle: {status}")]
    NotConverged { start: Value, status: String },

    #[error("{0} is not a fixed point of the step map")]
    NotFixedPoint(Value),

    #[error("rule {j} is not Collatz-like: {detail}")]
    NotCollatzLike { j: u64, detail: String },

    #[error("rule {j} has attractor representative {representative}, expected 0")]
    AttractorNotZero { j: u64, representative: Value },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
