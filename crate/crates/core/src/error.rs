use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a supported prime")]
    NotPrime(u64),
    #[error("precision p^{prec} with p = {p} does not fit the machine word")]
    PrecisionTooLarge { p: u64, prec: u32 },
    #[error("parameter mismatch: {0}")]
    Mismatch(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("index order violated: {0}")]
    IndexOrder(String),
    #[error("not a basis of Gamma: {0}")]
    InvalidBasis(String),
    #[error("not a tight generating set: {0}")]
    InvalidTightSet(String),
    #[error("working level {level} is below required level {required}")]
    LevelTooLow { level: u32, required: i64 },
    #[error("enumeration cap exceeded: {needed} > {cap}")]
    CapExceeded { needed: u128, cap: u128 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("compatibility violated: {0}")]
    Compatibility(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
