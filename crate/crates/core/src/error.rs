use thiserror::Error;

/// Errors produced by the codecs, enumerators and estimators.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("counts sum to {actual}, expected {expected}")]
    CountMismatch { expected: u64, actual: u64 },

    #[error("inexact division in incremental binomial step (t={t}, m={m})")]
    InexactDivision { t: u64, m: u64 },

    #[error("neighbor cell undefined for binomial step (t={t}, m={m})")]
    UndefinedStep { t: u64, m: u64 },

    #[error("duplicate symbol at alphabet position {position}")]
    DuplicateSymbol { position: usize },

    #[error("symbol at position {position} is not in the alphabet")]
    UnknownSymbol { position: usize },

    #[error("block does not belong to the given type class")]
    NotInClass,

    #[error("index out of range for a class of size {size}")]
    IndexOutOfRange { size: String },

    #[error("block length {n} too short for memory order {k} (need n > 2k)")]
    BlockTooShort { n: usize, k: usize },

    #[error("block length {actual} does not match codec block length {expected}")]
    WrongBlockLength { expected: usize, actual: usize },

    #[error("delta value {d} has a zero binary digit in the class size")]
    InvalidDelta { d: u64 },

    #[error("invalid codec parameters: {0}")]
    InvalidCodec(String),

    #[error("resource limit exceeded: {0}")]
    ScaleLimit(String),

    #[error("bit source exhausted")]
    BitsExhausted,

    #[error("message of {bits} bits does not fit a 32-bit length prefix")]
    MessageTooLarge { bits: u64 },

    #[error("framed stream truncated: {missing} bits missing")]
    Truncated { missing: u64 },

    #[error("cover too short for the framed secret: {missing} bits short")]
    Shortfall { missing: u64 },

    #[error("invalid probability parameters: {0}")]
    InvalidDistribution(String),

    #[error("class of size {size} is too large for exhaustive enumeration")]
    TooLarge { size: String },

    #[error("chi-square test not applicable: {0}")]
    ChiSquare(String),
}

pub type Result<T> = std::result::Result<T, Error>;
