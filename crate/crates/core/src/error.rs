use thiserror::Error;

/// Errors raised by the exact-computation routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("element code {code} out of range for field of order {q}")]
    CodeOutOfRange { code: u32, q: u32 },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("field mismatch between operands")]
    FieldMismatch,
    #[error("invalid index split: {0}")]
    InvalidSplit(String),
    #[error("{what}: enumeration of {needed} exceeds guard {limit} (set TRL_GUARD_OVERRIDE to raise it)")]
    GuardExceeded {
        what: &'static str,
        needed: String,
        limit: u128,
    },
    #[error("empty histogram")]
    EmptyHistogram,
    #[error("trivial character requested where a nontrivial one is required")]
    TrivialCharacter,
    #[error("tensor order {0} too small for this operation (need d >= 2)")]
    OrderTooSmall(usize),
    #[error("zero tensor has partition rank 0; rank-one check needs a nonzero tensor")]
    ZeroTensor,
    #[error("degree {degree} exceeds order {order}")]
    DegreeTooHigh { degree: u32, order: usize },
    #[error("degree {degree} is not below the characteristic {p}")]
    CharacteristicViolation { degree: u32, p: u32 },
    #[error("inconsistent witness: {0}")]
    InconsistentWitness(String),
    #[error("density below threshold: {0}")]
    DensityBelowThreshold(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("search budget of {0} nodes exhausted")]
    BudgetExhausted(u64),
    #[error("unknown bound id {0:?}")]
    UnknownTheorem(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
