use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("not a bijection of {{1..{degree}}}: {detail}")]
    NotABijection { degree: usize, detail: String },
    #[error("enumeration cap exceeded: |G|^k = {size} > cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("infeasible construction: {0}")]
    Infeasible(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("undecidable step at walk index {step}: {detail}")]
    UndecidableStep { step: usize, detail: String },
    #[error("disconnected cover: the trivial homomorphism does not determine a connected double cover")]
    DisconnectedCover,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
